"""How much an anonymized network drifts from the original."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import networkx as nx

from .graph import SocialNetwork
from .hierarchy import LabelHierarchy


@dataclass(frozen=True)
class UtilityMetrics:
    degree_l1: float
    edge_inflation: float
    height_histogram: dict
    aspl_delta: float
    edges_added: int

    def deltas(self) -> dict[str, float]:
        """Every metric as a distance from "unchanged"; all zero for identical graphs."""
        generalized = sum(c for hgt, c in self.height_histogram.items() if hgt > 0)
        return {
            "degree_l1": self.degree_l1,
            "edge_inflation": self.edge_inflation - 1.0 if self.edge_inflation else 0.0,
            "generalized_labels": float(generalized),
            "aspl_delta": self.aspl_delta,
            "edges_added": float(self.edges_added),
        }

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.deltas().values())

    def render(self) -> str:
        hist = " ".join(f"{k}:{v}" for k, v in sorted(self.height_histogram.items()))
        return (
            f"degree_l1 {self.degree_l1:.6f}\n"
            f"edge_inflation {self.edge_inflation:.6f}\n"
            f"edges_added {self.edges_added}\n"
            f"label_heights {hist}\n"
            f"aspl_delta {self.aspl_delta:.6f}\n"
        )


def _degree_distribution(g: SocialNetwork) -> dict[int, float]:
    n = len(g)
    counts = Counter(g.degree(v) for v in g.labels)
    return {d: c / n for d, c in counts.items()} if n else {}


def _aspl(g: SocialNetwork) -> float:
    if len(g) < 2:
        return 0.0
    nxg = g.to_networkx()
    biggest = max(nx.connected_components(nxg), key=lambda c: (len(c), -min(c)))
    if len(biggest) < 2:
        return 0.0
    return nx.average_shortest_path_length(nxg.subgraph(biggest))


def utility_report(original: SocialNetwork, published: SocialNetwork, h: LabelHierarchy | None = None) -> UtilityMetrics:
    """Degree-distribution L1 distance, edge inflation ratio, label generalization
    heights over shared vertices, and the change in average shortest path length
    on the largest component."""
    p, q = _degree_distribution(original), _degree_distribution(published)
    l1 = sum(abs(p.get(d, 0.0) - q.get(d, 0.0)) for d in set(p) | set(q))
    m0, m1 = original.number_of_edges(), published.number_of_edges()
    inflation = m1 / m0 if m0 else (1.0 if m1 == 0 else float("inf"))
    if h is None:
        h = LabelHierarchy.flat(set(original.labels.values()) | set(published.labels.values()))
    heights: Counter = Counter()
    for v, lab in original.labels.items():
        if v in published:
            heights[h.height_between(lab, published.labels[v])] += 1
    return UtilityMetrics(
        degree_l1=l1,
        edge_inflation=inflation,
        height_histogram=dict(sorted(heights.items())),
        aspl_delta=_aspl(published) - _aspl(original),
        edges_added=len(published.edges - original.edges),
    )
