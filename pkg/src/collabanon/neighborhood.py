"""Neighborhood extraction and canonical minimum DFS codes.

Isomorphism of labeled connected graphs reduces to equality of their minimum
DFS codes; a vertex neighborhood is summarized by the sorted list of its
components' codes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Mapping

import pynauty

from ._kernels import StateBudgetExceeded, min_dfs_code as _kernel
from .errors import ComponentTooLargeError, InvalidGraphError, UnknownVertexError
from .graph import SocialNetwork

EDGE_MARKER = "-"
VERTEX_MARKER = "."

DEFAULT_MAX_VERTICES = 12
DEFAULT_MAX_STATES = 2_000


def _tuple_key(t):
    i, j, li, _, lj = t
    if i == j:
        return (0, -1, 0, li, lj)
    if i < j:
        return (j, 0, -i, li, lj)
    return (i, 1, j, li, lj)


@total_ordering
@dataclass(frozen=True)
class DfsCode:
    """Minimum DFS code of a connected labeled graph.

    ``tuples`` holds ``(i, j, label_i, marker, label_j)`` in gSpan order, where
    ``i`` and ``j`` are discovery indices. A single vertex is encoded as the
    pseudo-tuple ``(0, 0, label, ".", label)``.
    """

    tuples: tuple
    n_vertices: int
    n_edges: int

    def sort_key(self):
        return (self.n_vertices, self.n_edges, tuple(_tuple_key(t) for t in self.tuples))

    def __lt__(self, other):
        if not isinstance(other, DfsCode):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def render(self) -> str:
        return ";".join(f"({i},{j},{li},{lj})" for i, j, li, _, lj in self.tuples)

    def __str__(self):
        return self.render()


@dataclass(frozen=True)
class NeighborhoodCode:
    """Component codes of one neighborhood in component code order."""

    components: tuple[DfsCode, ...] = ()

    def __len__(self):
        return len(self.components)

    @property
    def n_vertices(self) -> int:
        return sum(c.n_vertices for c in self.components)

    @property
    def n_edges(self) -> int:
        return sum(c.n_edges for c in self.components)

    def render(self) -> str:
        return " | ".join(c.render() for c in self.components)


@dataclass(frozen=True)
class Neighborhood:
    center: int
    radius: int
    subgraph: SocialNetwork

    def components(self) -> list[frozenset[int]]:
        g = self.subgraph
        return connected_components(g.adjacency, g.vertices)


def connected_components(adj: Mapping[int, Iterable[int]], members: Iterable[int]) -> list[frozenset[int]]:
    """Components of the subgraph induced on ``members``, ordered by smallest id."""
    members = set(members)
    seen: set[int] = set()
    comps = []
    for s in sorted(members):
        if s in seen:
            continue
        comp = {s}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y in members and y not in comp:
                    comp.add(y)
                    queue.append(y)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def _nauty_code(lab, local):
    """DFS code read off a nauty canonical labeling.

    Isomorphic inputs relabel to the identical graph, so the emitted code is
    a canonical form. It is not the lexicographic minimum; it is used where
    the minimum search would blow up on symmetric graphs.
    """
    n = len(lab)
    cells: dict[int, set[int]] = {}
    for v, l in enumerate(lab):
        cells.setdefault(l, set()).add(v)
    g = pynauty.Graph(
        n,
        adjacency_dict={v: list(ns) for v, ns in enumerate(local)},
        vertex_coloring=[cells[l] for l in sorted(cells)],
    )
    canon = pynauty.canon_label(g)  # canon[pos] = original vertex
    pos = {v: i for i, v in enumerate(canon)}
    nbrs = [sorted(pos[w] for w in local[canon[p]]) for p in range(n)]
    clab = [lab[canon[p]] for p in range(n)]
    dfs = {0: 0}
    order = [0]
    code = []
    stack = [(0, iter(nbrs[0]))]
    while stack:
        x, it = stack[-1]
        for y in it:
            if y in dfs:
                continue
            j = dfs[y] = len(order)
            order.append(y)
            code.append((dfs[x], j, clab[x], clab[y]))
            for z in sorted(dfs[w] for w in nbrs[y] if w in dfs and w != x):
                code.append((j, z, clab[y], clab[order[z]]))
            stack.append((y, iter(nbrs[y])))
            break
        else:
            stack.pop()
    return code, [canon[p] for p in order]


def _code_of_component(adj, labels, comp, max_states):
    """Return ``(DfsCode, vertex ids in discovery order)`` for one component."""
    verts = sorted(comp)
    if len(verts) == 1:
        l = labels[verts[0]]
        return DfsCode(((0, 0, l, VERTEX_MARKER, l),), 1, 0), verts
    index = {v: i for i, v in enumerate(verts)}
    names = sorted({labels[v] for v in verts})
    rank = {l: r for r, l in enumerate(names)}
    lab = [rank[labels[v]] for v in verts]
    local = [sorted(index[w] for w in adj[v] if w in index) for v in verts]
    if len(verts) > DEFAULT_MAX_VERTICES:
        raw, order = _nauty_code(lab, local)
    else:
        try:
            raw, order = _kernel(lab, local, max_states)
        except StateBudgetExceeded:
            # the overflow point depends only on the isomorphism class, so
            # isomorphic components always take the same route
            raw, order = _nauty_code(lab, local)
    tuples = tuple((i, j, names[a], EDGE_MARKER, names[b]) for i, j, a, b in raw)
    return DfsCode(tuples, len(verts), len(tuples)), [verts[i] for i in order]


def canonical_neighborhood(
    adj: Mapping[int, Iterable[int]],
    labels: Mapping[int, str],
    members: Iterable[int],
    max_states: int = DEFAULT_MAX_STATES,
) -> tuple[NeighborhoodCode, list[list[int]]]:
    """Code of the subgraph induced on ``members`` plus a canonical vertex order
    for every component (aligned with the code's component order)."""
    pieces = []
    for comp in connected_components(adj, members):
        code, order = _code_of_component(adj, labels, comp, max_states)
        pieces.append((code.sort_key(), min(comp), code, order))
    pieces.sort(key=lambda p: (p[0], p[1]))
    return NeighborhoodCode(tuple(p[2] for p in pieces)), [p[3] for p in pieces]


def min_dfs_code(
    component: SocialNetwork,
    max_vertices: int | None = DEFAULT_MAX_VERTICES,
    max_states: int = DEFAULT_MAX_STATES,
) -> DfsCode:
    """Lexicographically minimal DFS code over all DFS trees of ``component``."""
    n = len(component)
    if n == 0:
        raise InvalidGraphError("cannot encode an empty graph")
    if max_vertices is not None and n > max_vertices:
        raise ComponentTooLargeError(f"component has {n} vertices, cap is {max_vertices}")
    comps = connected_components(component.adjacency, component.vertices)
    if len(comps) != 1:
        raise InvalidGraphError(f"component is disconnected ({len(comps)} parts)")
    code, _ = _code_of_component(component.adjacency, component.labels, comps[0], max_states)
    return code


def codes_equal_iso(c1: SocialNetwork, c2: SocialNetwork, **kw) -> bool:
    """Label-preserving isomorphism test for connected graphs via code equality."""
    return min_dfs_code(c1, **kw) == min_dfs_code(c2, **kw)


def ball(adj: Mapping[int, Iterable[int]], v: int, radius: int) -> set[int]:
    """Vertices at distance 1..radius from ``v``."""
    frontier = {v}
    seen = {v}
    for _ in range(radius):
        nxt = set()
        for x in frontier:
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    nxt.add(y)
        frontier = nxt
    seen.discard(v)
    return seen


def extract_neighborhood(g: SocialNetwork, v: int, radius: int = 1, include_center: bool = False) -> Neighborhood:
    """Induced subgraph on the vertices within ``radius`` hops of ``v``."""
    if v not in g:
        raise UnknownVertexError(v)
    if radius not in (1, 2):
        raise ValueError(f"radius must be 1 or 2, got {radius}")
    members = ball(g.adjacency, v, radius)
    if include_center:
        members.add(v)
    return Neighborhood(v, radius, g.induced_subgraph(members))


def neighborhood_code(n: Neighborhood, max_states: int = DEFAULT_MAX_STATES) -> NeighborhoodCode:
    g = n.subgraph
    code, _ = canonical_neighborhood(g.adjacency, g.labels, g.vertices, max_states)
    return code


def vertex_codes(g: SocialNetwork, radius: int = 1, max_states: int = DEFAULT_MAX_STATES) -> dict[int, NeighborhoodCode]:
    """Neighborhood code of every vertex of ``g``."""
    adj, labels = g.adjacency, g.labels
    return {
        v: canonical_neighborhood(adj, labels, ball(adj, v, radius), max_states)[0]
        for v in sorted(g.labels)
    }
