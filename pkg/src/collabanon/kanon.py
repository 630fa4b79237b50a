"""Greedy neighborhood k-anonymization.

Vertices are processed in descending neighborhood size. Each seed vertex is
grouped with the k-1 candidates that are cheapest to anonymize against it.
A group whose neighborhoods differ is turned into a class of twins: every
member gets the group's common label and the union of the members' outside
neighbors. Swapping two twins is an automorphism, so their neighborhoods are
isomorphic at any radius, and twins stay twins when later disjoint groups
are edited. Edits are monotone: edges are only added and labels only
generalized.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import InvalidGraphError, UnknownVertexError
from .graph import SocialNetwork
from .hierarchy import LabelHierarchy
from .neighborhood import (
    DEFAULT_MAX_STATES,
    NeighborhoodCode,
    ball,
    canonical_neighborhood,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KAnonConfig:
    """Privacy level and edit weights.

    ``alpha`` weighs label generalizations, ``beta`` edge additions and
    ``gamma`` vertices added to a neighborhood.
    """

    k: int = 2
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    radius: int = 1
    max_states: int = DEFAULT_MAX_STATES

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("cost weights must be non-negative")
        if max(self.alpha, self.beta, self.gamma) <= 0:
            raise ValueError("at least one cost weight must be positive")
        if self.radius not in (1, 2):
            raise ValueError(f"radius must be 1 or 2, got {self.radius}")


@dataclass
class AnonymizationReport:
    edges_added: int = 0
    labels_generalized: int = 0
    vertices_added: int = 0
    total_cost: float = 0.0
    groups: list[list[int]] = field(default_factory=list)
    synthetic: list[int] = field(default_factory=list)
    added_edges: list[tuple[int, int]] = field(default_factory=list)
    repair_rounds: int = 0

    def finalize(self, cfg: KAnonConfig):
        self.total_cost = (
            cfg.alpha * self.labels_generalized
            + cfg.beta * self.edges_added
            + cfg.gamma * self.vertices_added
        )
        return self


# -- canonical matching plans -------------------------------------------------


def _code_order_key(code: NeighborhoodCode):
    return tuple(c.sort_key() for c in code.components)


def _unpack(code: NeighborhoodCode):
    """Vertex labels, edge set and per-component index ranges of a code."""
    labels: list[str] = []
    edges: set[tuple[int, int]] = set()
    spans = []
    for comp in code.components:
        off = len(labels)
        labels.extend([None] * comp.n_vertices)
        for i, j, li, _, lj in comp.tuples:
            labels[off + i] = li
            labels[off + j] = lj
            if i != j:
                a, b = off + i, off + j
                edges.add((a, b) if a < b else (b, a))
        spans.append(list(range(off, off + comp.n_vertices)))
    return labels, edges, spans


@dataclass(frozen=True)
class _Plan:
    pairs: tuple[tuple[int, int], ...]
    extra_a: tuple[int, ...]
    extra_b: tuple[int, ...]
    n_labels: int
    n_edges: int
    n_vertices: int

    def swapped(self) -> "_Plan":
        return _Plan(
            tuple((b, a) for a, b in self.pairs),
            self.extra_b,
            self.extra_a,
            self.n_labels,
            self.n_edges,
            self.n_vertices,
        )


def _make_plan(ca: NeighborhoodCode, cb: NeighborhoodCode, h: LabelHierarchy) -> _Plan:
    la, ea, sa = _unpack(ca)
    lb, eb, sb = _unpack(cb)
    pairs: list[tuple[int, int]] = []
    # identical components map onto each other position by position
    rest_a = []
    free_b = list(range(len(cb.components)))
    for x, comp in enumerate(ca.components):
        hit = next((y for y in free_b if cb.components[y] == comp), None)
        if hit is None:
            rest_a.append(x)
        else:
            free_b.remove(hit)
            pairs.extend(zip(sa[x], sb[hit]))
    rest_a.sort(key=lambda x: (-ca.components[x].n_vertices, -ca.components[x].n_edges, x))
    free_b.sort(key=lambda y: (-cb.components[y].n_vertices, -cb.components[y].n_edges, y))
    over_a: list[int] = []
    over_b: list[int] = []
    for x, y in zip(rest_a, free_b):
        va, vb = sa[x], sb[y]
        pairs.extend(zip(va, vb))
        over_a.extend(va[len(vb):])
        over_b.extend(vb[len(va):])
    for x in rest_a[len(free_b):]:
        over_a.extend(sa[x])
    for y in free_b[len(rest_a):]:
        over_b.extend(sb[y])
    pairs.extend(zip(over_a, over_b))
    extra_a = tuple(over_a[len(over_b):])
    extra_b = tuple(over_b[len(over_a):])

    n_labels = 0
    for a, b in pairs:
        if la[a] != lb[b]:
            top = h.lca(la[a], lb[b])
            n_labels += (top != la[a]) + (top != lb[b])
    fwd = dict(pairs)
    bwd = {b: a for a, b in pairs}
    n_edges = 0
    for x, y in ea:
        if x in fwd and y in fwd:
            p, q = fwd[x], fwd[y]
            if (min(p, q), max(p, q)) not in eb:
                n_edges += 1
        else:
            n_edges += 1
    for x, y in eb:
        if x in bwd and y in bwd:
            p, q = bwd[x], bwd[y]
            if (min(p, q), max(p, q)) not in ea:
                n_edges += 1
        else:
            n_edges += 1
    n_vertices = len(extra_a) + len(extra_b)
    # every added vertex also needs its link to the center
    n_edges += n_vertices
    return _Plan(tuple(pairs), extra_a, extra_b, n_labels, n_edges, n_vertices)


class _PlanCache:
    def __init__(self, h: LabelHierarchy):
        self.h = h
        self._cache: dict = {}

    def get(self, ca: NeighborhoodCode, cb: NeighborhoodCode) -> _Plan:
        swap = _code_order_key(cb) < _code_order_key(ca)
        key = (cb, ca) if swap else (ca, cb)
        plan = self._cache.get(key)
        if plan is None:
            plan = self._cache[key] = _make_plan(key[0], key[1], self.h)
        return plan.swapped() if swap else plan


# -- mutable working copy -----------------------------------------------------


class Workspace:
    """Mutable copy of a network that tracks edits and cached neighborhood codes."""

    def __init__(self, g: SocialNetwork, cfg: KAnonConfig, h: LabelHierarchy):
        missing = set(g.labels.values()) - set(h.nodes)
        if missing:
            raise InvalidGraphError(f"labels missing from hierarchy: {sorted(missing)}")
        self.cfg = cfg
        self.h = h
        self.radius = cfg.radius
        self.adj: dict[int, set[int]] = {v: set(ns) for v, ns in g.adjacency.items()}
        self.labels: dict[int, str] = dict(g.labels)
        self.sensitive: dict[int, str] = dict(g.sensitive)
        self.anonymized: set[int] = set()
        self.report = AnonymizationReport()
        self.plans = _PlanCache(h)
        self._info: dict[int, tuple[NeighborhoodCode, list[list[int]]]] = {}

    # neighborhoods
    def members(self, v: int) -> set[int]:
        return ball(self.adj, v, self.radius)

    def info(self, v: int):
        got = self._info.get(v)
        if got is None:
            got = self._info[v] = canonical_neighborhood(
                self.adj, self.labels, self.members(v), self.cfg.max_states
            )
        return got

    def code(self, v: int) -> NeighborhoodCode:
        return self.info(v)[0]

    def _closed_ball(self, x: int) -> set[int]:
        s = ball(self.adj, x, self.radius)
        s.add(x)
        return s

    # edits
    def add_edge(self, x: int, y: int):
        if x == y or y in self.adj[x]:
            return False
        self.adj[x].add(y)
        self.adj[y].add(x)
        self.report.edges_added += 1
        self.report.added_edges.append((min(x, y), max(x, y)))
        if self.radius == 1:
            stale = {x, y} | (self.adj[x] & self.adj[y])
        else:
            stale = self._closed_ball(x) | self._closed_ball(y)
        for z in stale:
            self._info.pop(z, None)
        return True

    def set_label(self, x: int, label: str):
        if self.labels[x] == label:
            return False
        self.labels[x] = label
        self.report.labels_generalized += 1
        for z in ball(self.adj, x, self.radius):
            self._info.pop(z, None)
        return True

    def add_vertex(self, label: str) -> int:
        vid = max(self.adj, default=-1) + 1
        self.adj[vid] = set()
        self.labels[vid] = label
        self.report.synthetic.append(vid)
        return vid

    def network(self) -> SocialNetwork:
        edges = [(u, v) for u, ns in self.adj.items() for v in ns if u < v]
        return SocialNetwork(self.labels, edges, self.sensitive)

    # cost and pairwise anonymization
    def plan(self, u: int, v: int) -> _Plan:
        return self.plans.get(self.code(u), self.code(v))

    def cost(self, u: int, v: int) -> float:
        p = self.plan(u, v)
        c = self.cfg
        return c.alpha * p.n_labels + c.beta * p.n_edges + c.gamma * p.n_vertices

    def _label_distance(self, have: str, want: str) -> int:
        if have == want:
            return 0
        top = self.h.lca(have, want)
        return self.h.height_between(have, top) + self.h.height_between(want, top)

    def _pick_new_member(self, center: int, other: int, want: str, taken: set[int]) -> int | None:
        inside = self.members(center)
        inside.add(center)
        best = None
        best_key = None
        for w in self.adj:
            if w in inside or w in taken:
                continue
            drag = 0
            if self.radius == 2:
                drag = len(self.adj[w] - inside)
            key = (
                w == other,
                w in self.anonymized,
                drag,
                self._label_distance(self.labels[w], want),
                len(self.adj[w]),
                w,
            )
            if best_key is None or key < best_key:
                best, best_key = w, key
        return best

    def anonymize_pair(self, u: int, v: int) -> bool:
        """Edit so that the neighborhoods of ``u`` and ``v`` move toward isomorphism.

        Returns False when they already are isomorphic; otherwise at least one
        edit is made. Interference between the two neighborhoods can leave
        them still different, so callers loop until the codes agree.
        """
        (ca, oa), (cb, ob) = self.info(u), self.info(v)
        if ca == cb:
            return False
        plan = self.plans.get(ca, cb)
        va = [x for comp in oa for x in comp]
        vb = [x for comp in ob for x in comp]
        la, _, _ = _unpack(ca)
        lb, _, _ = _unpack(cb)

        if plan.extra_a or plan.extra_b:
            if plan.extra_a:
                center, other, wanted = v, u, [la[i] for i in plan.extra_a]
            else:
                center, other, wanted = u, v, [lb[i] for i in plan.extra_b]
            if self.radius == 2:
                wanted = wanted[:1]
            taken: set[int] = set()
            for want in wanted:
                w = self._pick_new_member(center, other, want, taken)
                if w is None:
                    w = self.add_vertex(want)
                taken.add(w)
                self.add_edge(center, w)
                self.report.vertices_added += 1
            return True

        for a, b in plan.pairs:
            x, y = va[a], vb[b]
            lx, ly = self.labels[x], self.labels[y]
            if lx != ly:
                top = self.h.lca(lx, ly)
                self.set_label(x, top)
                self.set_label(y, top)
        # mirror every edge across the matching, in both directions
        fwd = {va[a]: vb[b] for a, b in plan.pairs}
        bwd = {y: x for x, y in fwd.items()}
        for src in (fwd, bwd):
            side = set(src)
            for x in sorted(side):
                for y in sorted(self.adj[x] & side):
                    if x < y:
                        self.add_edge(src[x], src[y])
        return True

    def twin_cost(self, u: int, v: int) -> float:
        """Edits that make ``u`` and ``v`` twins."""
        lu, lv = self.labels[u], self.labels[v]
        n_labels = 0
        if lu != lv:
            top = self.h.lca(lu, lv)
            n_labels = (top != lu) + (top != lv)
        n_edges = len((self.adj[u] - {v}) ^ (self.adj[v] - {u}))
        return self.cfg.alpha * n_labels + self.cfg.beta * n_edges

    def make_twins(self, group) -> None:
        top = self.h.lca(*(self.labels[x] for x in group))
        for x in group:
            self.set_label(x, top)
        inside = set(group)
        outside = set().union(*(self.adj[x] for x in group)) - inside
        for x in group:
            for y in sorted(outside - self.adj[x]):
                self.add_edge(x, y)
        # any edge inside the group makes it a clique, otherwise it stays independent
        if any(self.adj[x] & inside for x in group):
            for i, x in enumerate(group):
                for y in group[i + 1 :]:
                    self.add_edge(x, y)

    def uniform(self, group) -> bool:
        first = self.code(group[0])
        return all(self.code(m) == first for m in group[1:])

    def anonymize_group(self, group: list[int]):
        """Make the neighborhoods of ``group`` pairwise isomorphic.

        ``group[0]`` is the reference. Each round that finds a mismatch makes
        at least one monotone edit on a fixed vertex set, so this terminates.
        """
        rep = group[0]
        while not self.uniform(group):
            for m in group[1:]:
                if self.code(m) != self.code(rep):
                    self.anonymize_pair(rep, m)


def _hierarchy_for(g: SocialNetwork, h: LabelHierarchy | None) -> LabelHierarchy:
    return LabelHierarchy.flat(g.label_universe) if h is None else h


def anonymization_cost(
    g: SocialNetwork, u: int, v: int, cfg: KAnonConfig, h: LabelHierarchy | None = None
) -> float:
    """Weighted edit count to make the neighborhoods of ``u`` and ``v`` isomorphic."""
    for x in (u, v):
        if x not in g:
            raise UnknownVertexError(x)
    if u == v:
        raise ValueError("cost is defined for two distinct vertices")
    ws = Workspace(g, cfg, _hierarchy_for(g, h))
    return ws.cost(u, v)


def k_anonymize(
    g: SocialNetwork,
    cfg: KAnonConfig,
    h: LabelHierarchy | None = None,
    seed=0,
) -> tuple[SocialNetwork, AnonymizationReport]:
    """Neighborhood k-anonymization by greedy grouping.

    ``seed`` is accepted for pipeline uniformity; ties are broken by vertex id
    so the result is fully determined by the input.
    """
    if len(g) < cfg.k:
        raise InvalidGraphError(f"graph has {len(g)} vertices, fewer than k={cfg.k}")
    ws = Workspace(g, cfg, _hierarchy_for(g, h))
    k = cfg.k

    def by_size(vs):
        return sorted(vs, key=lambda v: (-len(ws.members(v)), v))

    pending = by_size(g.labels)
    groups: list[list[int]] = []
    while pending:
        seed_vertex = pending.pop(0)
        if len(pending) >= 2 * k - 1:
            ranked = sorted(pending, key=lambda v: (ws.twin_cost(seed_vertex, v), v))
            chosen = ranked[: k - 1]
        else:
            chosen = list(pending)
        group = sorted([seed_vertex, *chosen])
        groups.append(group)
        taken = set(chosen)
        pending = by_size(v for v in pending if v not in taken)

    if groups and len(groups[-1]) < k and len(groups) > 1:
        groups[-2] = sorted(groups[-2] + groups.pop())

    # Groups that are already uniform are left alone, but edits to later
    # groups can break them; those are made twins on a later pass. Twin
    # groups are never broken again, so this settles.
    twins: set[int] = set()
    rounds = 0
    while True:
        changed = False
        for idx, group in enumerate(groups):
            if idx in twins or ws.uniform(group):
                continue
            ws.make_twins(group)
            twins.add(idx)
            changed = True
        if not changed:
            break
        rounds += 1
    ws.anonymized.update(g.labels)
    ws.report.repair_rounds = max(rounds - 1, 0)
    ws.report.groups = groups
    log.debug("k=%d: %d groups, %d made twins, %d passes", k, len(groups), len(twins), rounds)
    return ws.network(), ws.report.finalize(cfg)


def code_classes(g: SocialNetwork, radius: int = 1, max_states: int = DEFAULT_MAX_STATES) -> dict[NeighborhoodCode, list[int]]:
    """Vertices grouped by neighborhood code."""
    classes: dict[NeighborhoodCode, list[int]] = {}
    adj, labels = g.adjacency, g.labels
    for v in sorted(labels):
        code, _ = canonical_neighborhood(adj, labels, ball(adj, v, radius), max_states)
        classes.setdefault(code, []).append(v)
    return classes


def verify_k_anonymity(g: SocialNetwork, k: int, radius: int = 1) -> bool:
    """True iff every neighborhood-code class has at least ``k`` members."""
    return all(len(vs) >= k for vs in code_classes(g, radius).values())


def anonymize_pair_2hop(
    g: SocialNetwork, u: int, v: int, h: LabelHierarchy | None = None, cfg: KAnonConfig | None = None
) -> SocialNetwork:
    """Make the radius-2 neighborhoods of ``u`` and ``v`` isomorphic.

    Matched labels are generalized to their common ancestor, then missing
    vertices and edges are added. Nothing is deleted.
    """
    for x in (u, v):
        if x not in g:
            raise UnknownVertexError(x)
    if u == v:
        raise ValueError("u and v must differ")
    base = cfg or KAnonConfig()
    cfg = KAnonConfig(k=2, alpha=base.alpha, beta=base.beta, gamma=base.gamma, radius=2, max_states=base.max_states)
    ws = Workspace(g, cfg, _hierarchy_for(g, h))
    ws.anonymize_group([u, v])
    return ws.network()
