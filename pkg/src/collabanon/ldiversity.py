"""Distinct l-diversity over vertex equivalence classes.

Enforcement merges refinement classes until each holds l distinct sensitive
values, generalizes each merged cell to one label, then adds edges so that
every cell is regular inside and every pair of cells is biregular. Such a
partition is equitable, so the stable refinement of the output never splits
a cell and each of its classes inherits the cell's diversity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx

from .equivalence import EquivalencePartition, stable_refinement
from .errors import PartitionError, UnsatisfiableError
from .graph import SocialNetwork
from .hierarchy import LabelHierarchy
from .kanon import KAnonConfig, Workspace, _hierarchy_for, k_anonymize, verify_k_anonymity

VARIANTS = ("distinct",)


@dataclass(frozen=True)
class LDivConfig:
    l: int = 2
    variant: str = "distinct"

    def __post_init__(self):
        if self.l < 1:
            raise ValueError(f"l must be >= 1, got {self.l}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unsupported variant {self.variant!r}")


@dataclass(frozen=True)
class ClassRow:
    index: int
    members: tuple[int, ...]
    distinct: int
    passed: bool
    unvalued: tuple[int, ...] = ()

    @property
    def size(self):
        return len(self.members)


@dataclass
class DiversityReport:
    rows: list[ClassRow]
    l: int
    edges_added: int = 0
    labels_generalized: int = 0

    @property
    def overall(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def offending_classes(self) -> list[int]:
        return [r.index for r in self.rows if not r.passed]

    @property
    def unvalued(self) -> list[int]:
        return sorted(v for r in self.rows for v in r.unvalued)

    def render(self) -> str:
        lines = [
            f"class {r.index} size={r.size} distinct={r.distinct} pass={str(r.passed).lower()}" for r in self.rows
        ]
        lines.append(f"l-diverse: {str(self.overall).lower()}")
        return "\n".join(lines)


def check_l_diversity(g: SocialNetwork, p: EquivalencePartition, cfg: LDivConfig) -> DiversityReport:
    """A class passes when its members carry at least ``l`` distinct sensitive values."""
    covered = p.vertices
    missing = [v for v in g.sensitive if v not in covered]
    if missing:
        raise PartitionError(f"partition misses vertices with sensitive values: {sorted(missing)[:5]}")
    rows = []
    for i, c in enumerate(p.classes, 1):
        members = tuple(sorted(c))
        vals = {g.sensitive[v] for v in members if v in g.sensitive}
        unvalued = tuple(v for v in members if v not in g.sensitive)
        rows.append(ClassRow(i, members, len(vals), len(vals) >= cfg.l, unvalued))
    return DiversityReport(rows, cfg.l)


def diversity_partition(g: SocialNetwork) -> EquivalencePartition:
    """The partition l-diversity is judged on: stabilized vertex refinement."""
    return stable_refinement(g)[1]


# -- enforcement --------------------------------------------------------------


def _merge_cells(g, cells, l, min_size, ws):
    def values(c):
        return {g.sensitive[v] for v in c if v in g.sensitive}

    def bad(c):
        return len(values(c)) < l or len(c) < min_size

    cells = [sorted(c) for c in cells]
    while True:
        failing = [c for c in cells if bad(c)]
        if not failing or len(cells) == 1:
            return cells
        cur = min(failing, key=lambda c: (len(values(c)), len(c), c[0]))
        have = values(cur)
        others = [c for c in cells if c is not cur]
        if len(have) < l:
            useful = [c for c in others if values(c) - have] or others
        else:
            useful = others
        partner = min(useful, key=lambda c: (ws.cost(cur[0], c[0]), c[0]))
        cells = [c for c in others if c is not partner] + [sorted(cur + partner)]


def _biregular_additions(adj, a_side, b_side):
    """Edges to add between two cells so each side has constant degree."""
    na, nb = len(a_side), len(b_side)
    deg_a = {x: len(adj[x] & b_side) for x in a_side}
    deg_b = {y: len(adj[y] & a_side) for y in b_side}
    present = sum(deg_a.values())
    if present == 0:
        return []
    step = math.lcm(na, nb)
    for t in range(1, min(na, nb) + 1):
        da, db = t * step // na, t * step // nb
        if da > nb:
            break
        if da < max(deg_a.values()) or db < max(deg_b.values()):
            continue
        need = na * da - present
        if need == 0:
            return []
        flow = nx.DiGraph()
        for x in a_side:
            flow.add_edge("s", ("a", x), capacity=da - deg_a[x])
            for y in b_side:
                if y not in adj[x]:
                    flow.add_edge(("a", x), ("b", y), capacity=1)
        for y in b_side:
            flow.add_edge(("b", y), "t", capacity=db - deg_b[y])
        value, paths = nx.maximum_flow(flow, "s", "t")
        if value == need:
            return sorted(
                (x, y)
                for x in a_side
                for (_, y), f in paths[("a", x)].items()
                if f > 0
            )
    # the complete bipartite graph is always biregular
    return [(x, y) for x in sorted(a_side) for y in sorted(b_side) if y not in adj[x]]


def _regular_additions(adj, cell):
    """Edges to add inside a cell so its induced subgraph is regular."""
    members = sorted(cell)
    n = len(members)
    deg = {x: len(adj[x] & cell) for x in members}
    top = max(deg.values(), default=0)
    if top == min(deg.values(), default=0):
        return []
    for d in range(top, n):
        if (d * n) % 2:
            continue
        want = {x: d - deg[x] for x in members}
        added = []
        have = {x: set(adj[x] & cell) for x in members}
        while True:
            open_ = [x for x in members if want[x] > 0]
            if not open_:
                return added
            x = max(open_, key=lambda v: (want[v], -v))
            options = [y for y in open_ if y != x and y not in have[x]]
            if not options:
                break
            y = max(options, key=lambda v: (want[v], -v))
            have[x].add(y)
            have[y].add(x)
            want[x] -= 1
            want[y] -= 1
            added.append((min(x, y), max(x, y)))
    return [(x, y) for i, x in enumerate(members) for y in members[i + 1 :] if y not in adj[x]]


def enforce_l_diversity(
    g: SocialNetwork,
    cfg: LDivConfig,
    kcfg: KAnonConfig | None = None,
    h: LabelHierarchy | None = None,
    seed=0,
) -> tuple[SocialNetwork, DiversityReport]:
    """Edit ``g`` until every stable refinement class is l-diverse.

    ``kcfg.k`` (when given) is also a floor on merged cell size and its
    weights drive the choice of merge partner. ``seed`` is accepted for
    pipeline uniformity; ties break by vertex id.
    """
    distinct = set(g.sensitive.values())
    if len(distinct) < cfg.l:
        raise UnsatisfiableError(f"l={cfg.l} but only {len(distinct)} distinct sensitive values exist")
    kcfg = kcfg or KAnonConfig(k=1)
    if len(g) == 0:
        return g, check_l_diversity(g, diversity_partition(g), cfg)
    before = check_l_diversity(g, diversity_partition(g), cfg)
    if before.overall and all(r.size >= kcfg.k for r in before.rows):
        return g, before

    h = _hierarchy_for(g, h)
    ws = Workspace(g, kcfg, h)
    cells = _merge_cells(g, diversity_partition(g).classes, cfg.l, kcfg.k, ws)

    for c in cells:
        top = h.lca(*(ws.labels[v] for v in c))
        for v in c:
            ws.set_label(v, top)
    sets = [frozenset(c) for c in cells]
    for i, a in enumerate(sets):
        for x, y in _regular_additions(ws.adj, a):
            ws.add_edge(x, y)
        for b in sets[i + 1 :]:
            for x, y in _biregular_additions(ws.adj, a, b):
                ws.add_edge(x, y)

    out = ws.network()
    report = check_l_diversity(out, diversity_partition(out), cfg)
    report.edges_added = ws.report.edges_added
    report.labels_generalized = ws.report.labels_generalized
    return out, report


def enforce_k_and_l(
    g: SocialNetwork,
    kcfg: KAnonConfig,
    cfg: LDivConfig | None = None,
    h: LabelHierarchy | None = None,
    seed=0,
) -> SocialNetwork:
    """Alternate k-anonymization and l-diversity enforcement until both hold.

    Either pass can undo the other, but both only add edges and generalize
    labels, and a complete graph with one label satisfies both, so the loop
    ends.
    """
    h = _hierarchy_for(g, h)
    out = g
    while True:
        changed = False
        if not verify_k_anonymity(out, kcfg.k, kcfg.radius):
            out, _ = k_anonymize(out, kcfg, h, seed)
            changed = True
        if cfg is not None:
            report = check_l_diversity(out, diversity_partition(out), cfg)
            if not report.overall:
                out, _ = enforce_l_diversity(out, cfg, kcfg, h, seed)
                changed = True
        if not changed:
            return out
