"""Labeled simple graphs, their text format, and naive anonymization."""

from __future__ import annotations

import io
import random
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, TextIO

from .errors import InvalidGraphError, NetworkFormatError, UnknownVertexError

HEADER = "# collabanon network v1"


def _norm_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def _check_token(value, what):
    if not isinstance(value, str) or not value or any(c.isspace() for c in value):
        raise InvalidGraphError(f"{what} must be a non-empty whitespace-free string, got {value!r}")


class SocialNetwork:
    """An undirected, vertex-labeled simple graph with optional sensitive values.

    Instances are immutable. Edges are stored once as ``(min, max)`` pairs and
    queried symmetrically.
    """

    __slots__ = ("_labels", "_edges", "_sensitive", "_adj")

    def __init__(
        self,
        labels: Mapping[int, str],
        edges: Iterable[tuple[int, int]] = (),
        sensitive: Mapping[int, str] | None = None,
    ):
        lab = {}
        for v, l in labels.items():
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise InvalidGraphError(f"vertex ids must be non-negative integers, got {v!r}")
            _check_token(l, "label")
            lab[v] = l
        adj: dict[int, set[int]] = {v: set() for v in lab}
        es = set()
        for u, v in edges:
            if u == v:
                raise InvalidGraphError(f"self-loop on vertex {u}")
            if u not in adj:
                raise UnknownVertexError(u)
            if v not in adj:
                raise UnknownVertexError(v)
            es.add(_norm_edge(u, v))
            adj[u].add(v)
            adj[v].add(u)
        sens = {}
        for v, s in (sensitive or {}).items():
            if v not in lab:
                raise UnknownVertexError(v)
            _check_token(s, "sensitive value")
            sens[v] = s
        self._labels = MappingProxyType(lab)
        self._edges = frozenset(es)
        self._sensitive = MappingProxyType(sens)
        self._adj = MappingProxyType({v: frozenset(ns) for v, ns in adj.items()})

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self._labels)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return self._edges

    @property
    def labels(self) -> Mapping[int, str]:
        return self._labels

    @property
    def sensitive(self) -> Mapping[int, str]:
        return self._sensitive

    @property
    def label_universe(self) -> frozenset[str]:
        return frozenset(self._labels.values())

    @property
    def adjacency(self) -> Mapping[int, frozenset[int]]:
        return self._adj

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._labels))

    def __contains__(self, v) -> bool:
        return v in self._labels

    def number_of_edges(self) -> int:
        return len(self._edges)

    def neighbors(self, v: int) -> frozenset[int]:
        try:
            return self._adj[v]
        except KeyError:
            raise UnknownVertexError(v) from None

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self._edges

    def induced_subgraph(self, vertices: Iterable[int]) -> "SocialNetwork":
        keep = set(vertices)
        for v in keep:
            if v not in self._labels:
                raise UnknownVertexError(v)
        return SocialNetwork(
            {v: self._labels[v] for v in keep},
            [(u, v) for u, v in self._edges if u in keep and v in keep],
            {v: s for v, s in self._sensitive.items() if v in keep},
        )

    def replace(self, labels=None, edges=None, sensitive=None) -> "SocialNetwork":
        return SocialNetwork(
            self._labels if labels is None else labels,
            self._edges if edges is None else edges,
            self._sensitive if sensitive is None else sensitive,
        )

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        for v in sorted(self._labels):
            g.add_node(v, label=self._labels[v])
        g.add_edges_from(sorted(self._edges))
        return g

    def __eq__(self, other):
        if not isinstance(other, SocialNetwork):
            return NotImplemented
        return (
            self._labels == other._labels
            and self._edges == other._edges
            and self._sensitive == other._sensitive
        )

    def __hash__(self):
        return hash((frozenset(self._labels.items()), self._edges))

    def __repr__(self):
        return f"SocialNetwork(|V|={len(self)}, |E|={len(self._edges)})"


# -- text format --------------------------------------------------------------


def _read_text(text) -> str:
    if isinstance(text, str):
        return text
    return text.read()


def _parse_int(tok, lineno, source, what="vertex id"):
    try:
        value = int(tok)
    except ValueError:
        raise NetworkFormatError(f"{what} must be an integer, got {tok!r}", lineno, source) from None
    if value < 0:
        raise NetworkFormatError(f"{what} must be non-negative, got {value}", lineno, source)
    return value


def _parse(text, source=None, allow_attributes=False):
    labels: dict[int, str] = {}
    sensitive: dict[int, str] = {}
    edges: list[tuple[int, int, int]] = []
    attrs: list[tuple[int, str, str, int]] = []
    for lineno, raw in enumerate(_read_text(text).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "v":
            if len(parts) not in (3, 4):
                raise NetworkFormatError("expected 'v <id> <label> [s=<sensitive>]'", lineno, source)
            vid = _parse_int(parts[1], lineno, source)
            if vid in labels:
                raise NetworkFormatError(f"duplicate vertex id {vid}", lineno, source)
            labels[vid] = parts[2]
            if len(parts) == 4:
                if not parts[3].startswith("s=") or len(parts[3]) == 2:
                    raise NetworkFormatError("expected 's=<sensitive>'", lineno, source)
                sensitive[vid] = parts[3][2:]
        elif kind == "e":
            if len(parts) != 3:
                raise NetworkFormatError("expected 'e <id1> <id2>'", lineno, source)
            u = _parse_int(parts[1], lineno, source)
            v = _parse_int(parts[2], lineno, source)
            if u == v:
                raise NetworkFormatError(f"self-loop on vertex {u}", lineno, source)
            edges.append((u, v, lineno))
        elif kind == "a" and allow_attributes:
            if len(parts) != 3 or "=" not in parts[2]:
                raise NetworkFormatError("expected 'a <vertex-id> <key>=<value>'", lineno, source)
            vid = _parse_int(parts[1], lineno, source)
            key, _, value = parts[2].partition("=")
            if not key or not value:
                raise NetworkFormatError("attribute key and value must be non-empty", lineno, source)
            attrs.append((vid, key, value, lineno))
        else:
            raise NetworkFormatError(f"unrecognized line type {kind!r}", lineno, source)

    seen = set()
    for u, v, lineno in edges:
        for x in (u, v):
            if x not in labels:
                raise NetworkFormatError(f"edge references unknown vertex {x}", lineno, source)
        e = _norm_edge(u, v)
        if e in seen:
            raise NetworkFormatError(f"duplicate edge {e[0]}-{e[1]}", lineno, source)
        seen.add(e)
    for vid, _, _, lineno in attrs:
        if vid not in labels:
            raise NetworkFormatError(f"attribute references unknown vertex {vid}", lineno, source)
    g = SocialNetwork(labels, seen, sensitive)
    return g, attrs


def parse_network(text: str | TextIO, source: str | None = None) -> SocialNetwork:
    """Parse the line-oriented network format.

    ``v <id> <label> [s=<sensitive>]`` declares a vertex, ``e <id1> <id2>`` an
    edge; ``#`` starts a comment line. Vertex and edge lines may come in any
    order. Errors carry the offending line number.
    """
    g, _ = _parse(text, source)
    return g


def serialize_network(g: SocialNetwork) -> str:
    out = io.StringIO()
    out.write(HEADER + "\n")
    for v in sorted(g.labels):
        s = g.sensitive.get(v)
        out.write(f"v {v} {g.labels[v]}" + (f" s={s}" if s is not None else "") + "\n")
    for u, v in sorted(g.edges):
        out.write(f"e {u} {v}\n")
    return out.getvalue()


def read_network(path) -> SocialNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh, source=str(path))


# -- naive anonymization ------------------------------------------------------


@dataclass(frozen=True)
class AnonymizationMapping:
    """Bijection from original vertex ids to published pseudonyms."""

    forward: Mapping[int, int]
    inverse: Mapping[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        fwd = dict(self.forward)
        inv = {}
        for x, p in fwd.items():
            if p in inv:
                raise InvalidGraphError(f"pseudonym {p} assigned to both {inv[p]} and {x}")
            inv[p] = x
        object.__setattr__(self, "forward", MappingProxyType(fwd))
        object.__setattr__(self, "inverse", MappingProxyType(inv))

    def __len__(self):
        return len(self.forward)

    def __call__(self, x: int) -> int:
        return self.forward[x]

    def to_text(self, labels: Mapping[int, str] | None = None) -> str:
        """Render as ``<original> <pseudonym>`` lines.

        With ``labels`` (and injective labels) the original column holds the
        label, as in a published lookup table; otherwise it holds the vertex id.
        """
        use_labels = labels is not None and len(set(labels.values())) == len(labels)
        lines = []
        for x in sorted(self.forward):
            key = labels[x] if use_labels else str(x)
            lines.append(f"{key} {self.forward[x]}")
        return "".join(line + "\n" for line in lines)


def read_mapping(text: str | TextIO, source=None) -> dict[str, int]:
    pairs: dict[str, int] = {}
    for lineno, raw in enumerate(_read_text(text).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.rsplit(maxsplit=1)
        if len(parts) != 2:
            raise NetworkFormatError("expected '<original> <pseudonym>'", lineno, source)
        if parts[0] in pairs:
            raise NetworkFormatError(f"duplicate original {parts[0]!r}", lineno, source)
        pairs[parts[0]] = _parse_int(parts[1], lineno, source, "pseudonym")
    return pairs


def naive_anonymize(
    g: SocialNetwork,
    seed=0,
    mapping: Mapping[int, int] | None = None,
    keep_labels: bool = False,
) -> tuple[SocialNetwork, AnonymizationMapping]:
    """Publish ``g`` under a random bijection of vertex ids.

    Pseudonyms are ``1..n`` shuffled by ``random.Random(seed)`` unless an
    explicit ``mapping`` is given. Identifying labels are replaced by the
    pseudonym itself; pass ``keep_labels=True`` when labels are not
    identifying. Sensitive values travel with their vertex.
    """
    if mapping is None:
        order = sorted(g.labels)
        pseudonyms = list(range(1, len(order) + 1))
        random.Random(seed).shuffle(pseudonyms)
        mapping = dict(zip(order, pseudonyms))
    m = AnonymizationMapping(mapping)
    if set(m.forward) != set(g.labels):
        raise InvalidGraphError("mapping must cover exactly the vertices of the graph")
    labels = {m(x): (g.labels[x] if keep_labels else str(m(x))) for x in g.labels}
    edges = [(m(u), m(v)) for u, v in g.edges]
    sensitive = {m(x): s for x, s in g.sensitive.items()}
    return SocialNetwork(labels, edges, sensitive), m
