"""Vertex partitions: iterated refinement, structural and automorphic equivalence.

H_0(x) is the label of x and H_i(x) pairs that label with the multiset of
H_{i-1} over the neighbors of x. Keeping the label at every level makes each
level a refinement of the one before.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import ComponentTooLargeError, PartitionError
from .graph import SocialNetwork

KINDS = ("refinement", "structural", "automorphic")
DEFAULT_AUTOMORPHISM_CAP = 10


@dataclass(frozen=True)
class EquivalencePartition:
    """Disjoint vertex classes, ordered by smallest member."""

    kind: str
    classes: tuple[frozenset[int], ...]
    level: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PartitionError(f"unknown partition kind {self.kind!r}")
        seen: set[int] = set()
        for c in self.classes:
            if not c:
                raise PartitionError("empty class")
            if seen & c:
                raise PartitionError("classes overlap")
            seen |= c
        ordered = tuple(sorted(self.classes, key=min))
        object.__setattr__(self, "classes", ordered)

    @classmethod
    def from_groups(cls, kind: str, groups: Iterable[Iterable[int]], level=None):
        return cls(kind, tuple(frozenset(g) for g in groups), level)

    def __len__(self):
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset().union(*self.classes)

    def class_of(self) -> dict[int, int]:
        return {v: i for i, c in enumerate(self.classes) for v in c}

    def same_blocks(self, other: "EquivalencePartition") -> bool:
        return set(self.classes) == set(other.classes)

    def refines(self, other: "EquivalencePartition") -> bool:
        """True if every class of ``self`` sits inside one class of ``other``."""
        where = other.class_of()
        for c in self.classes:
            homes = {where.get(v) for v in c}
            if len(homes) != 1 or None in homes:
                return False
        return True

    def render(self) -> str:
        return "\n".join(
            f"class {i}: " + " ".join(str(v) for v in sorted(c)) for i, c in enumerate(self.classes, 1)
        )


def _groups(color: dict[int, object]) -> list[list[int]]:
    out: dict[object, list[int]] = {}
    for v in sorted(color):
        out.setdefault(color[v], []).append(v)
    return list(out.values())


def signatures(g: SocialNetwork, i: int) -> dict[int, object]:
    """Literal H_i values as nested tuples; exponential in ``i``, for inspection."""
    if i < 0:
        raise ValueError("level must be >= 0")
    sig: dict[int, object] = dict(g.labels)
    for _ in range(i):
        sig = {v: (g.labels[v], tuple(sorted((sig[w] for w in g.neighbors(v)), key=repr))) for v in g.labels}
    return sig


def refinement_colors(g: SocialNetwork, i: int) -> dict[int, int]:
    """H_i compressed to integer colors.

    Each level maps (label, sorted neighbor colors) to a fresh integer
    through a dictionary, so equal colors mean equal signatures exactly.
    """
    if i < 0:
        raise ValueError("level must be >= 0")
    table: dict[object, int] = {}
    color = {v: table.setdefault(("L", g.labels[v]), len(table)) for v in sorted(g.labels)}
    for _ in range(i):
        table = {}
        color = {
            v: table.setdefault((g.labels[v], tuple(sorted(color[w] for w in g.neighbors(v)))), len(table))
            for v in sorted(g.labels)
        }
    return color


def vertex_refinement(g: SocialNetwork, i: int) -> EquivalencePartition:
    """Classes of equal H_i."""
    return EquivalencePartition.from_groups("refinement", _groups(refinement_colors(g, i)), level=i)


def stable_refinement(g: SocialNetwork) -> tuple[int, EquivalencePartition]:
    """Smallest ``i`` with H_i and H_{i+1} inducing the same partition."""
    i = 0
    cur = vertex_refinement(g, 0)
    while True:
        nxt = vertex_refinement(g, i + 1)
        if len(nxt) == len(cur):
            return i, cur
        i, cur = i + 1, nxt


def structural_equivalence(g: SocialNetwork) -> EquivalencePartition:
    """Same label and N(x) minus y equal to N(y) minus x.

    Adjacent pairs then share closed neighborhoods and non-adjacent pairs
    open ones, so the relation is the union of two equivalences that cannot
    overlap on three vertices; union-find over both keys gives the classes.
    """
    parent = {v: v for v in g.labels}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for closed in (False, True):
        first: dict[object, int] = {}
        for v in sorted(g.labels):
            ns = set(g.neighbors(v))
            if closed:
                ns.add(v)
            w = first.setdefault((g.labels[v], frozenset(ns)), v)
            if w != v:
                parent[find(v)] = find(w)
    return EquivalencePartition.from_groups("structural", _groups({v: find(v) for v in g.labels}))


def _find_automorphism(g: SocialNetwork, color: dict[int, int], x: int, y: int) -> dict[int, int] | None:
    """Backtracking search for a label-preserving automorphism with x -> y."""
    order = sorted(g.labels, key=lambda v: (v != x, color[v], v))
    adj = g.adjacency
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(pos: int) -> bool:
        if pos == len(order):
            return True
        v = order[pos]
        cands = [y] if pos == 0 else [w for w in sorted(g.labels) if color[w] == color[v] and w not in used]
        for w in cands:
            ok = True
            for u, mu in mapping.items():
                if (u in adj[v]) != (mu in adj[w]):
                    ok = False
                    break
            if not ok:
                continue
            mapping[v] = w
            used.add(w)
            if extend(pos + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    return dict(mapping) if extend(0) else None


def automorphic_equivalence(g: SocialNetwork, cap: int = DEFAULT_AUTOMORPHISM_CAP) -> EquivalencePartition:
    """Orbits of the label-preserving automorphism group (exact search)."""
    n = len(g)
    if n > cap:
        raise ComponentTooLargeError(f"automorphism search is capped at {cap} vertices, graph has {n}")
    # stable refinement colors are invariant, so orbits never cross them
    _, stable = stable_refinement(g)
    color = stable.class_of()
    orbit = {v: v for v in g.labels}

    def find(v):
        while orbit[v] != v:
            v = orbit[v]
        return v

    vs = sorted(g.labels)
    for a, x in enumerate(vs):
        for y in vs[a + 1 :]:
            if color[x] != color[y] or find(x) == find(y):
                continue
            perm = _find_automorphism(g, color, x, y)
            if perm is None:
                continue
            # every cycle of a found automorphism lies inside one orbit
            for u, w in perm.items():
                ru, rw = find(u), find(w)
                if ru != rw:
                    orbit[max(ru, rw)] = min(ru, rw)
    return EquivalencePartition.from_groups("automorphic", _groups({v: find(v) for v in g.labels}))


@dataclass(frozen=True)
class ReductionNetwork:
    """Quotient over structural classes; ``(i, i)`` marks related members inside class ``i``."""

    nodes: tuple[frozenset[int], ...]
    labels: tuple[str, ...]
    edges: frozenset[tuple[int, int]]

    def render(self) -> str:
        lines = [f"node {i} {self.labels[i]}: " + " ".join(map(str, sorted(c))) for i, c in enumerate(self.nodes)]
        lines += [f"edge {a} {b}" for a, b in sorted(self.edges)]
        return "\n".join(lines)


def reduction_network(g: SocialNetwork, p: EquivalencePartition) -> ReductionNetwork:
    """One node per structural class; a class-level edge wherever members are related."""
    if p.kind != "structural":
        raise PartitionError(f"reduction needs a structural partition, got {p.kind}")
    if p.vertices != frozenset(g.labels):
        raise PartitionError("partition does not cover the graph")
    nodes = p.classes
    edges = set()
    for a, ca in enumerate(nodes):
        for b in range(a, len(nodes)):
            cb = nodes[b]
            pairs = [(x, y) for x in ca for y in cb if x != y]
            if not pairs:
                continue
            hits = {g.has_edge(x, y) for x, y in pairs}
            if len(hits) > 1:
                raise PartitionError(f"classes {a} and {b} are not uniformly related")
            if hits.pop():
                edges.add((a, b))
    labels = []
    for c in nodes:
        ls = {g.labels[v] for v in c}
        if len(ls) != 1:
            raise PartitionError("structural class mixes labels")
        labels.append(ls.pop())
    return ReductionNetwork(nodes, tuple(labels), frozenset(edges))


def render_partition(p: EquivalencePartition) -> str:
    return p.render()
