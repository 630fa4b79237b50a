"""Adversary simulations against a published network.

Three kinds of background knowledge are modelled: the target's neighborhood
subgraph, its refinement signature H_i, and a set of sensitive values the
target is known not to have.

Neighborhood matching comes in two modes. ``exact`` keeps vertices whose
published neighborhood has the same code as the knowledge. ``embedding``
keeps vertices whose published neighborhood could have been produced from
the knowledge by monotone edits: the known neighborhood maps injectively
into it, edges onto edges, each label onto itself or an ancestor. The second
mode is the right one for knowledge taken from the original graph, since an
anonymizer changes the target's own neighborhood.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field

from .equivalence import EquivalencePartition, signatures, structural_equivalence
from .errors import PartitionError, UnknownVertexError
from .graph import SocialNetwork
from .hierarchy import LabelHierarchy
from .neighborhood import ball, canonical_neighborhood, extract_neighborhood

KNOWLEDGE_KINDS = ("neighborhood", "refinement", "sensitive-background")
MODES = ("exact", "embedding")
CSV_HEADER = ("target", "knowledge", "candidates", "confidence", "certain_inference")


@dataclass(frozen=True)
class AdversaryKnowledge:
    """What the adversary knows about one target.

    ``payload`` is a neighborhood subgraph, an H_i signature, or a set of
    excluded sensitive values depending on ``kind``. ``target`` names the
    target's published vertex when the adversary has already located it.
    """

    kind: str
    payload: object
    radius: int = 1
    level: int | None = None
    target: int | None = None

    def __post_init__(self):
        if self.kind not in KNOWLEDGE_KINDS:
            raise ValueError(f"unknown knowledge kind {self.kind!r}")
        if self.kind == "neighborhood":
            if not isinstance(self.payload, SocialNetwork):
                raise TypeError("neighborhood knowledge needs a SocialNetwork payload")
            if self.radius not in (1, 2):
                raise ValueError("radius must be 1 or 2")
        elif self.kind == "refinement":
            if self.level is None or self.level < 0:
                raise ValueError("refinement knowledge needs a level >= 0")
        else:
            object.__setattr__(self, "payload", frozenset(self.payload))

    @classmethod
    def neighborhood_of(cls, g: SocialNetwork, v: int, radius: int = 1) -> "AdversaryKnowledge":
        return cls("neighborhood", extract_neighborhood(g, v, radius).subgraph, radius=radius)

    @classmethod
    def refinement_of(cls, g: SocialNetwork, v: int, level: int) -> "AdversaryKnowledge":
        if v not in g:
            raise UnknownVertexError(v)
        return cls("refinement", signatures(g, level)[v], level=level)

    @classmethod
    def background(cls, target: int, excluded=()) -> "AdversaryKnowledge":
        return cls("sensitive-background", frozenset(excluded), target=target)

    def describe(self) -> str:
        if self.kind == "neighborhood":
            return f"neighborhood(r={self.radius})"
        if self.kind == "refinement":
            return f"refinement(H{self.level})"
        return "background(" + "|".join(sorted(self.payload)) + ")"


@dataclass(frozen=True)
class AttackResult:
    candidates: tuple[int, ...]
    inference: dict = field(default_factory=dict)

    @property
    def confidence(self) -> float:
        return 1.0 / len(self.candidates) if self.candidates else 0.0

    @property
    def certain(self) -> bool:
        """Some sensitive value is inferred with frequency 1."""
        return any(f == 1.0 for f in self.inference.values())


def _distribution(values) -> dict[str, float]:
    counts = Counter(values)
    total = sum(counts.values())
    return {v: c / total for v, c in sorted(counts.items())} if total else {}


def _inference(g: SocialNetwork, members, excluded=frozenset()) -> dict[str, float]:
    return _distribution(g.sensitive[v] for v in members if v in g.sensitive and g.sensitive[v] not in excluded)


def _match_isolated(pending, free, ok) -> bool:
    """Bipartite matching of leftover isolated pattern vertices onto free targets."""
    owner: dict[int, int] = {}

    def augment(p, seen):
        for t in free:
            if t in seen or not ok(t, p):
                continue
            seen.add(t)
            if t not in owner or augment(owner[t], seen):
                owner[t] = p
                return True
        return False

    return all(augment(p, set()) for p in pending)


def _assignable(masks, free: int) -> bool:
    """Whether every mask can get its own distinct bit inside ``free``."""
    owner: dict[int, int] = {}

    def augment(i, seen):
        bits = masks[i] & free & ~seen[0]
        while bits:
            low = bits & -bits
            bits ^= low
            seen[0] |= low
            t = low.bit_length() - 1
            if t not in owner or augment(owner[t], seen):
                owner[t] = i
                return True
        return False

    return all(augment(i, [0]) for i in sorted(range(len(masks)), key=lambda i: bin(masks[i]).count("1")))


class _Pattern:
    """A known neighborhood prepared for repeated embedding tests."""

    def __init__(self, g: SocialNetwork):
        vs = sorted(g.labels)
        index = {v: i for i, v in enumerate(vs)}
        nbrs = [{index[w] for w in g.neighbors(v)} for v in vs]
        self.n = len(vs)
        self.m = g.number_of_edges()
        self.labels = [g.labels[v] for v in vs]
        self.deg = [len(ns) for ns in nbrs]
        self.degs = sorted(self.deg, reverse=True)
        self.isolated = [p for p in range(self.n) if not nbrs[p]]
        linked = [p for p in range(self.n) if nbrs[p]]
        # each next vertex is adjacent to the mapped ones whenever possible
        order: list[int] = []
        placed: set[int] = set()
        while len(order) < len(linked):
            frontier = [p for p in linked if p not in placed and nbrs[p] & placed]
            pool = frontier or [p for p in linked if p not in placed]
            nxt = max(pool, key=lambda p: (len(nbrs[p] & placed), self.deg[p], -p))
            order.append(nxt)
            placed.add(nxt)
        self.order = order
        self.back = [[q for q in nbrs[p] if q in set(order[:i])] for i, p in enumerate(order)]


class _Target:
    """Bitset view of a graph that patterns are embedded into."""

    def __init__(self, g: SocialNetwork, compatible):
        tv = sorted(g.labels)
        index = {v: i for i, v in enumerate(tv)}
        self.n = len(tv)
        self.m = g.number_of_edges()
        self.compatible = compatible
        self.bits = []
        for v in tv:
            b = 0
            for w in g.neighbors(v):
                b |= 1 << index[w]
            self.bits.append(b)
        self.deg = [len(g.neighbors(v)) for v in tv]
        self.degs = sorted(self.deg, reverse=True)
        self.labels = [g.labels[v] for v in tv]
        # twins inside the target are interchangeable images
        first: dict = {}
        self.twin = list(range(self.n))
        for t in range(self.n):
            for key in ((0, self.labels[t], self.bits[t]), (1, self.labels[t], self.bits[t] | 1 << t)):
                rep = first.setdefault(key, t)
                if rep != t:
                    self.twin[t] = self.twin[rep]
        self._masks: dict = {}
        self._ok: dict = {}

    def ok(self, t: int, label: str) -> bool:
        key = (self.labels[t], label)
        got = self._ok.get(key)
        if got is None:
            got = self._ok[key] = self.compatible(*key)
        return got

    def mask(self, label: str, degree: int) -> int:
        key = (label, degree)
        got = self._masks.get(key)
        if got is None:
            got = 0
            for t in range(self.n):
                if self.deg[t] >= degree and self.ok(t, label):
                    got |= 1 << t
            self._masks[key] = got
        return got


def _embeds(pat: _Pattern, target: _Target) -> bool:
    if pat.n > target.n or pat.m > target.m:
        return False
    if any(a > b for a, b in zip(pat.degs, target.degs)):
        return False
    if pat.n == 0:
        return True
    cand = []
    for p in range(pat.n):
        bits = target.mask(pat.labels[p], pat.deg[p])
        if not bits:
            return False
        cand.append(bits)
    full = (1 << target.n) - 1
    if not _assignable(cand, full):
        return False
    order, back = pat.order, pat.back
    # pattern vertices still unmapped at each position, for pruning
    rest = [[cand[p] for p in order[i:]] + [cand[p] for p in pat.isolated] for i in range(len(order) + 1)]
    image: dict[int, int] = {}
    # where a fresh component starts, what remains depends only on the used set
    dead: set[tuple[int, int]] = set()

    def ok(t, p):
        return target.ok(t, pat.labels[p])

    def extend(i, used):
        fresh = i == len(order) or not back[i]
        if fresh and (i, used) in dead:
            return False
        if fresh and i and not _assignable(rest[i], full & ~used):
            dead.add((i, used))
            return False
        if i == len(order):
            free = [t for t in range(target.n) if not used >> t & 1]
            if _match_isolated(pat.isolated, free, ok):
                return True
            dead.add((i, used))
            return False
        p = order[i]
        bits = cand[p] & ~used
        for q in back[i]:
            bits &= target.bits[image[q]]
        tried = set()
        while bits:
            low = bits & -bits
            bits ^= low
            t = low.bit_length() - 1
            if target.twin[t] in tried:
                continue
            tried.add(target.twin[t])
            image[p] = t
            if extend(i + 1, used | low):
                return True
        image.pop(p, None)
        if fresh:
            dead.add((i, used))
        return False

    return extend(0, 0)


def embeds(pattern: SocialNetwork, target: SocialNetwork, compatible) -> bool:
    """Injective map of ``pattern`` into ``target`` sending edges to edges,
    with ``compatible(target_label, pattern_label)`` on every vertex."""
    return _embeds(_Pattern(pattern), _Target(target, compatible))


class PublishedIndex:
    """Neighborhood codes and classes of a published graph, computed once."""

    def __init__(self, published: SocialNetwork, radius: int = 1, h: LabelHierarchy | None = None):
        self.g = published
        self.radius = radius
        self.h = h
        self._codes = None
        self._classes = None
        self._twins = None
        self._targets: dict[int, _Target] = {}
        self._hier: LabelHierarchy | None = None

    @property
    def codes(self):
        if self._codes is None:
            adj, labels = self.g.adjacency, self.g.labels
            self._codes = {
                v: canonical_neighborhood(adj, labels, ball(adj, v, self.radius))[0] for v in sorted(labels)
            }
        return self._codes

    @property
    def classes(self) -> list[list[int]]:
        if self._classes is None:
            groups: dict = {}
            for v, c in self.codes.items():
                groups.setdefault(c, []).append(v)
            self._classes = sorted(groups.values(), key=lambda vs: vs[0])
        return self._classes

    def code_partition(self) -> EquivalencePartition:
        return EquivalencePartition.from_groups("refinement", self.classes)

    @property
    def twin_classes(self) -> list[list[int]]:
        """Structural classes: swapping twins is an automorphism, so their
        neighborhoods are isomorphic and one representative speaks for all."""
        if self._twins is None:
            self._twins = [sorted(c) for c in structural_equivalence(self.g).classes]
        return self._twins

    def hierarchy_for(self, pattern: SocialNetwork) -> LabelHierarchy:
        """The configured hierarchy grown to cover every label seen so far.

        Unknown labels hang under the root, which leaves all existing
        ancestor relations intact, so cached compatibility answers stay valid.
        """
        if self._hier is None:
            base = self.h or LabelHierarchy.flat(())
            self._hier = base.extended(self.g.labels.values())
        missing = set(pattern.labels.values()) - self._hier.nodes
        if missing:
            self._hier = self._hier.extended(missing)
        return self._hier

    def _compatible(self, published_label: str, known_label: str) -> bool:
        return self._hier.is_ancestor_or_self(published_label, known_label)

    def exact(self, pattern: SocialNetwork) -> list[int]:
        code, _ = canonical_neighborhood(pattern.adjacency, pattern.labels, pattern.vertices)
        return [v for v, c in self.codes.items() if c == code]

    def embedding(self, pattern: SocialNetwork) -> list[int]:
        self.hierarchy_for(pattern)
        pat = _Pattern(pattern)
        out: list[int] = []
        for members in self.twin_classes:
            rep = members[0]
            target = self._targets.get(rep)
            if target is None:
                around = self.g.induced_subgraph(ball(self.g.adjacency, rep, self.radius))
                target = self._targets[rep] = _Target(around, self._compatible)
            if _embeds(pat, target):
                out.extend(members)
        return sorted(out)


def neighborhood_attack(
    published: SocialNetwork,
    know: AdversaryKnowledge,
    mode: str = "exact",
    h: LabelHierarchy | None = None,
    index: PublishedIndex | None = None,
) -> AttackResult:
    """Vertices of ``published`` consistent with a known neighborhood."""
    if know.kind != "neighborhood":
        raise ValueError(f"neighborhood_attack needs neighborhood knowledge, got {know.kind}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    index = index or PublishedIndex(published, know.radius, h)
    if index.radius != know.radius:
        raise ValueError("index radius differs from knowledge radius")
    cands = index.exact(know.payload) if mode == "exact" else index.embedding(know.payload)
    return AttackResult(tuple(cands), _inference(published, cands))


def refinement_attack(published: SocialNetwork, know: AdversaryKnowledge) -> AttackResult:
    """Vertices whose H_i signature equals the known one."""
    if know.kind != "refinement":
        raise ValueError(f"refinement_attack needs refinement knowledge, got {know.kind}")
    sig = signatures(published, know.level)
    cands = [v for v in sorted(sig) if sig[v] == know.payload]
    return AttackResult(tuple(cands), _inference(published, cands))


def _target_class(published, p: EquivalencePartition, know: AdversaryKnowledge, h=None) -> list[int]:
    if know.target is not None:
        if know.target not in published:
            raise UnknownVertexError(know.target)
        for c in p.classes:
            if know.target in c:
                return sorted(c)
        raise PartitionError(f"vertex {know.target} is in no class")
    if know.kind == "neighborhood":
        cands = neighborhood_attack(published, know, "embedding", h).candidates
    elif know.kind == "refinement":
        cands = refinement_attack(published, know).candidates
    else:
        raise PartitionError("background knowledge must name its target")
    where = p.class_of()
    hit = sorted({v for c in cands for v in p.classes[where[c]]} if cands else set())
    if not hit:
        raise PartitionError("knowledge locates no class")
    return hit


def homogeneity_attack(
    published: SocialNetwork, p: EquivalencePartition, know: AdversaryKnowledge, h=None
) -> AttackResult:
    """Sensitive value distribution inside the target's class."""
    members = _target_class(published, p, know, h)
    return AttackResult(tuple(members), _inference(published, members))


def background_attack(
    published: SocialNetwork, p: EquivalencePartition, know: AdversaryKnowledge, h=None
) -> AttackResult:
    """Like the homogeneity attack after ruling out the excluded values."""
    members = _target_class(published, p, know, h)
    excluded = know.payload if know.kind == "sensitive-background" else frozenset()
    return AttackResult(tuple(members), _inference(published, members, excluded))


def homogeneity_rate(published: SocialNetwork, p: EquivalencePartition) -> float:
    """Fraction of vertices with a sensitive value whose class pins that value down."""
    where = p.class_of()
    certain = {}
    hits = total = 0
    for v in sorted(published.sensitive):
        c = where.get(v)
        if c is None:
            raise PartitionError(f"vertex {v} is in no class")
        if c not in certain:
            certain[c] = len({published.sensitive[x] for x in p.classes[c] if x in published.sensitive}) == 1
        total += 1
        hits += certain[c]
    return hits / total if total else 0.0


@dataclass(frozen=True)
class SweepRow:
    target: int
    knowledge: str
    candidates: int
    confidence: float
    certain_inference: bool


def neighborhood_sweep(
    original: SocialNetwork,
    published: SocialNetwork,
    radius: int = 1,
    mode: str = "embedding",
    h: LabelHierarchy | None = None,
) -> list[SweepRow]:
    """Attack every original vertex with its true neighborhood."""
    index = PublishedIndex(published, radius, h)
    rows = []
    for v in sorted(original.labels):
        know = AdversaryKnowledge.neighborhood_of(original, v, radius)
        res = neighborhood_attack(published, know, mode, h, index)
        rows.append(SweepRow(v, know.describe(), len(res.candidates), res.confidence, res.certain))
    return rows


def homogeneity_sweep(published: SocialNetwork, p: EquivalencePartition) -> list[SweepRow]:
    rows = []
    for v in sorted(published.labels):
        res = homogeneity_attack(published, p, AdversaryKnowledge.background(v))
        rows.append(SweepRow(v, "class", len(res.candidates), res.confidence, res.certain))
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.target, r.knowledge, r.candidates, f"{r.confidence:.6f}", str(r.certain_inference).lower()])
    return buf.getvalue()
