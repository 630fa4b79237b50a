"""Collaborative networks merged from several parties, with provenance.

Every attribute value and every edge remembers the set of parties that
supplied it. Merging unions those sets, revoking removes a party from them,
and anything left with no source is dropped. Queries only ever read an
anonymized snapshot.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import AnonymizationError, NetworkFormatError, ProvenanceError
from .graph import SocialNetwork, _parse, naive_anonymize, serialize_network
from .hierarchy import LabelHierarchy
from .kanon import KAnonConfig
from .ldiversity import LDivConfig, enforce_k_and_l

LABEL_KEY = "label"
SENSITIVE_KEY = "sensitive"
DEFAULT_ID_KEYS = ("name",)

Sources = frozenset  # of party ids


def _check_party(party):
    if not isinstance(party, str) or not party or any(c.isspace() for c in party):
        raise ProvenanceError(f"party id must be a non-empty whitespace-free string, got {party!r}")


# -- contributions ------------------------------------------------------------


@dataclass(frozen=True)
class PartyNetwork:
    """One party's contribution (or revocation): a network plus attribute values per vertex."""

    party: str
    network: SocialNetwork
    attributes: Mapping[int, Mapping[str, tuple[str, ...]]] = field(default_factory=dict)

    def __post_init__(self):
        _check_party(self.party)
        for v in self.attributes:
            if v not in self.network:
                raise ProvenanceError(f"attributes given for unknown vertex {v}")

    def values(self, v: int) -> dict[str, tuple[str, ...]]:
        """All attribute values of ``v``, including its label and sensitive value."""
        out: dict[str, list[str]] = {LABEL_KEY: [self.network.labels[v]]}
        if v in self.network.sensitive:
            out[SENSITIVE_KEY] = [self.network.sensitive[v]]
        for key, vals in self.attributes.get(v, {}).items():
            bucket = out.setdefault(key, [])
            bucket.extend(x for x in vals if x not in bucket)
        return {k: tuple(vs) for k, vs in out.items()}


def parse_contribution(text, party: str, source=None) -> PartyNetwork:
    """Network format plus ``a <vertex-id> <key>=<value>`` attribute lines.

    A key may be repeated on one vertex to give several values.
    """
    g, raw = _parse(text, source, allow_attributes=True)
    attrs: dict[int, dict[str, list[str]]] = {}
    for vid, key, value, _ in raw:
        bucket = attrs.setdefault(vid, {}).setdefault(key, [])
        if value not in bucket:
            bucket.append(value)
    return PartyNetwork(party, g, {v: {k: tuple(vs) for k, vs in d.items()} for v, d in attrs.items()})


def serialize_contribution(n: PartyNetwork) -> str:
    lines = [serialize_network(n.network)]
    for v in sorted(n.attributes):
        for key in sorted(n.attributes[v]):
            for value in n.attributes[v][key]:
                lines.append(f"a {v} {key}={value}\n")
    return "".join(lines)


# -- the collaborative network ------------------------------------------------


@dataclass(frozen=True)
class ProvenancedNode:
    id: int
    attributes: Mapping[str, Mapping[str, Sources]]
    identifying_key: tuple[str, ...]

    def identity(self) -> tuple[str, ...]:
        return tuple(next(iter(self.attributes[k])) for k in self.identifying_key)

    def values(self, key: str) -> list[str]:
        return sorted(self.attributes.get(key, {}))

    def preferred(self, key: str) -> str | None:
        """The value of ``key`` backed by most parties; ties go to the smallest value."""
        vals = self.attributes.get(key)
        if not vals:
            return None
        return min(vals, key=lambda x: (-len(vals[x]), x))

    @property
    def sensitive(self) -> str | None:
        return self.preferred(SENSITIVE_KEY)


@dataclass(frozen=True)
class ProvenancedEdge:
    endpoints: tuple[int, int]
    sources: Sources


def _freeze_attrs(attrs) -> Mapping[str, Mapping[str, Sources]]:
    return MappingProxyType(
        {k: MappingProxyType({x: frozenset(s) for x, s in sorted(vals.items())}) for k, vals in sorted(attrs.items()) if vals}
    )


class CollabNetwork:
    """The provenance view S of a collaborative network. Immutable.

    Internal node ids are assigned in order of first appearance; equality
    ignores them and compares nodes by their identifying attributes.
    """

    def __init__(self, id_keys=DEFAULT_ID_KEYS, nodes=(), edges=(), parties=(), next_id=None):
        if not id_keys:
            raise ProvenanceError("at least one identifying attribute key is required")
        self.id_keys = tuple(id_keys)
        self.nodes: Mapping[int, ProvenancedNode] = MappingProxyType({n.id: n for n in nodes})
        self.edges: Mapping[tuple[int, int], ProvenancedEdge] = MappingProxyType({e.endpoints: e for e in edges})
        self.parties = frozenset(parties)
        self._next = next_id if next_id is not None else max(self.nodes, default=-1) + 1
        self._by_identity = {n.identity(): n.id for n in self.nodes.values()}
        self._check()

    def _check(self):
        if len(self._by_identity) != len(self.nodes):
            raise ProvenanceError("two nodes share the same identifying attributes")
        for n in self.nodes.values():
            for key, vals in n.attributes.items():
                for x, src in vals.items():
                    if not src or not src <= self.parties:
                        raise ProvenanceError(f"node {n.id} attribute {key}={x} has bad sources {sorted(src)}")
        for (u, v), e in self.edges.items():
            if u == v or u not in self.nodes or v not in self.nodes:
                raise ProvenanceError(f"edge {u}-{v} has a bad endpoint")
            if not e.sources or not e.sources <= self.parties:
                raise ProvenanceError(f"edge {u}-{v} has bad sources {sorted(e.sources)}")

    def find(self, identity: tuple[str, ...]) -> int | None:
        return self._by_identity.get(tuple(identity))

    def __len__(self):
        return len(self.nodes)

    def view(self):
        """Id-free canonical form used for equality."""
        ident = {i: n.identity() for i, n in self.nodes.items()}
        nodes = {
            ident[i]: {k: {x: frozenset(s) for x, s in vals.items()} for k, vals in n.attributes.items()}
            for i, n in self.nodes.items()
        }
        edges = {frozenset((ident[u], ident[v])): e.sources for (u, v), e in self.edges.items()}
        return self.id_keys, nodes, edges, self.parties

    def __eq__(self, other):
        if not isinstance(other, CollabNetwork):
            return NotImplemented
        return self.view() == other.view()

    def __repr__(self):
        return f"CollabNetwork(nodes={len(self.nodes)}, edges={len(self.edges)}, parties={sorted(self.parties)})"


def _identity_of(n: PartyNetwork, v: int, id_keys) -> tuple[str, ...]:
    vals = n.values(v)
    out = []
    for k in id_keys:
        got = vals.get(k, ())
        if len(got) != 1:
            raise ProvenanceError(
                f"party {n.party}: vertex {v} needs exactly one value for identifying key {k!r}, has {len(got)}"
            )
        out.append(got[0])
    return tuple(out)


def _identities(s: CollabNetwork, n: PartyNetwork) -> dict[int, tuple[str, ...]]:
    ident = {v: _identity_of(n, v, s.id_keys) for v in sorted(n.network.labels)}
    seen: dict[tuple, int] = {}
    for v, key in ident.items():
        if key in seen:
            raise ProvenanceError(f"party {n.party}: vertices {seen[key]} and {v} share identity {key}")
        seen[key] = v
    return ident


def merge(s: CollabNetwork, n: PartyNetwork) -> CollabNetwork:
    """Add a party's contribution to ``s``.

    A contributed vertex matches the node with equal identifying attributes.
    Every attribute value and edge it brings gains the party as a source, or
    is added with the party as its only source. Unmatched vertices become new
    nodes. Conflicting values for one key are kept side by side, each with
    its own sources.
    """
    ident = _identities(s, n)
    attrs = {i: {k: {x: set(src) for x, src in vals.items()} for k, vals in node.attributes.items()} for i, node in s.nodes.items()}
    edges = {e: set(pe.sources) for e, pe in s.edges.items()}
    by_identity = dict(s._by_identity)
    next_id = s._next
    local: dict[int, int] = {}
    for v, key in ident.items():
        i = by_identity.get(key)
        if i is None:
            i = next_id
            next_id += 1
            by_identity[key] = i
            attrs[i] = {}
        local[v] = i
        for k, vals in n.values(v).items():
            for x in vals:
                attrs[i].setdefault(k, {}).setdefault(x, set()).add(n.party)
    for u, v in n.network.edges:
        a, b = sorted((local[u], local[v]))
        edges.setdefault((a, b), set()).add(n.party)
    nodes = [ProvenancedNode(i, _freeze_attrs(a), s.id_keys) for i, a in attrs.items()]
    return CollabNetwork(
        s.id_keys,
        nodes,
        [ProvenancedEdge(e, frozenset(src)) for e, src in edges.items()],
        s.parties | {n.party},
        next_id,
    )


def revoke(s: CollabNetwork, r: PartyNetwork) -> CollabNetwork:
    """Withdraw what ``r.party`` contributed, restricted to the scope of ``r``.

    The party leaves the source set of each attribute value and edge listed
    in ``r``. Values and edges left without sources disappear, and so do
    nodes left without attributes, along with their edges.
    """
    if r.party not in s.parties:
        raise ProvenanceError(f"party {r.party!r} has not contributed to this network")
    ident = _identities(s, r)
    attrs = {i: {k: {x: set(src) for x, src in vals.items()} for k, vals in node.attributes.items()} for i, node in s.nodes.items()}
    edges = {e: set(pe.sources) for e, pe in s.edges.items()}
    local = {v: s.find(key) for v, key in ident.items()}
    for v, i in local.items():
        if i is None:
            continue
        for k, vals in r.values(v).items():
            for x in vals:
                src = attrs[i].get(k, {}).get(x)
                if src is not None:
                    src.discard(r.party)
    for u, v in r.network.edges:
        if local[u] is None or local[v] is None:
            continue
        src = edges.get(tuple(sorted((local[u], local[v]))))
        if src is not None:
            src.discard(r.party)

    nodes = []
    for i, a in attrs.items():
        kept = {k: {x: src for x, src in vals.items() if src} for k, vals in a.items()}
        kept = {k: vals for k, vals in kept.items() if vals}
        if not kept:
            continue
        if any(k not in kept for k in s.id_keys):
            raise ProvenanceError(f"revocation would strip the identifying attributes of node {i} but keep others")
        nodes.append(ProvenancedNode(i, _freeze_attrs(kept), s.id_keys))
    alive = {n.id for n in nodes}
    kept_edges = [ProvenancedEdge(e, frozenset(src)) for e, src in edges.items() if src and e[0] in alive and e[1] in alive]
    used = {p for n in nodes for vals in n.attributes.values() for src in vals.values() for p in src}
    used |= {p for e in kept_edges for p in e.sources}
    parties = s.parties if r.party in used else s.parties - {r.party}
    return CollabNetwork(s.id_keys, nodes, kept_edges, parties, s._next)


def flatten(s: CollabNetwork, label_key: str = LABEL_KEY, sensitive_key: str = SENSITIVE_KEY) -> SocialNetwork:
    """Drop provenance and identifying attributes, keeping structure.

    Vertex ids are the internal node ids. A multi-valued label or sensitive
    attribute contributes its best-supported value.
    """
    labels, sensitive = {}, {}
    for i, n in s.nodes.items():
        lab = n.preferred(label_key)
        if lab is None:
            raise ProvenanceError(f"node {i} has no {label_key!r} attribute")
        labels[i] = lab
        sv = n.preferred(sensitive_key)
        if sv is not None:
            sensitive[i] = sv
    return SocialNetwork(labels, s.edges.keys(), sensitive)


# -- anonymized snapshots and queries ----------------------------------------


@dataclass(frozen=True)
class PrivacyLevel:
    k: KAnonConfig
    l: LDivConfig | None = None

    def covers(self, other: "PrivacyLevel") -> bool:
        if self.k.k < other.k.k or self.k.radius != other.k.radius:
            return False
        if other.l is None:
            return True
        return self.l is not None and self.l.l >= other.l.l


@dataclass(frozen=True)
class Snapshot:
    """A published copy of S: anonymized, with shuffled vertex ids."""

    published: SocialNetwork
    level: PrivacyLevel
    _where: Mapping[int, int] = field(repr=False)


def anonymize(
    s: CollabNetwork, level: PrivacyLevel, h: LabelHierarchy | None = None, seed=0, label_key=LABEL_KEY, sensitive_key=SENSITIVE_KEY
) -> Snapshot:
    flat = flatten(s, label_key, sensitive_key)
    if len(flat) < level.k.k:
        raise ProvenanceError(f"only {len(flat)} nodes, cannot publish at k={level.k.k}")
    out = enforce_k_and_l(flat, level.k, level.l, h, seed)
    published, mapping = naive_anonymize(out, seed=seed, keep_labels=True)
    return Snapshot(published, level, MappingProxyType(dict(mapping.forward)))


@dataclass(frozen=True)
class UserQuery:
    """Attribute predicates ``key=value``; all must hold."""

    predicates: tuple[tuple[str, str], ...]
    requester: str = "anonymous"

    def __post_init__(self):
        if not self.predicates:
            raise ProvenanceError("a query needs at least one predicate")

    @classmethod
    def parse(cls, terms, requester="anonymous") -> "UserQuery":
        preds = []
        for t in terms:
            key, sep, value = t.partition("=")
            if not sep or not key or not value:
                raise ProvenanceError(f"predicate must look like key=value, got {t!r}")
            preds.append((key, value))
        return cls(tuple(preds), requester)


def query(s: CollabNetwork, q: UserQuery, privacy: PrivacyLevel, snapshot: Snapshot | None) -> SocialNetwork:
    """The published subnetwork induced by nodes that match every predicate.

    Predicates are evaluated against S, but the answer is cut from the
    anonymized snapshot, so it carries no identifying attributes or
    provenance. Predicates on identifying keys are refused, as they would
    point at one person.
    """
    if snapshot is None or not snapshot.level.covers(privacy):
        raise ProvenanceError("refusing to query a network that is not anonymized at the requested level")
    for key, _ in q.predicates:
        if key in s.id_keys:
            raise ProvenanceError(f"predicates on identifying key {key!r} are not allowed")
    hits = [
        i for i, n in s.nodes.items()
        if all(value in n.attributes.get(key, ()) for key, value in q.predicates)
    ]
    return snapshot.published.induced_subgraph(snapshot._where[i] for i in hits if i in snapshot._where)


# -- persistent store ---------------------------------------------------------


class CollabStore:
    """Append-only log of merges and revocations, with a published snapshot.

    One writer at a time. Readers get the snapshot that was current when
    they asked; a merge swaps in its new network and snapshot together.
    """

    def __init__(self, path=None, level: PrivacyLevel | None = None, h=None, seed=0, id_keys=DEFAULT_ID_KEYS):
        self.path = None if path is None else os.fspath(path)
        self.level = level or PrivacyLevel(KAnonConfig(k=2))
        self.h = h
        self.seed = seed
        self._write = threading.Lock()
        self._state = (CollabNetwork(id_keys), None)
        if self.path and os.path.exists(self.path):
            self._replay()

    @property
    def network(self) -> CollabNetwork:
        return self._state[0]

    @property
    def snapshot(self) -> Snapshot | None:
        return self._state[1]

    def _publish(self, s: CollabNetwork) -> Snapshot | None:
        try:
            return anonymize(s, self.level, self.h, self.seed)
        except ProvenanceError:
            return None  # too small to publish yet

    def _apply(self, op: str, n: PartyNetwork) -> CollabNetwork:
        s = self.network
        return merge(s, n) if op == "merge" else revoke(s, n)

    def _replay(self):
        s = self.network
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    n = parse_contribution(rec["network"], rec["party"], source=f"{self.path}:{lineno}")
                    s = merge(s, n) if rec["op"] == "merge" else revoke(s, n)
                except (KeyError, ValueError, AnonymizationError) as exc:
                    raise NetworkFormatError(f"bad log record: {exc}", lineno, self.path) from None
        self._state = (s, self._publish(s))

    def _commit(self, op: str, n: PartyNetwork):
        with self._write:
            s = self._apply(op, n)
            snap = self._publish(s)
            if self.path:
                rec = {"op": op, "party": n.party, "network": serialize_contribution(n)}
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
            self._state = (s, snap)
            return s

    def merge(self, n: PartyNetwork) -> CollabNetwork:
        return self._commit("merge", n)

    def revoke(self, r: PartyNetwork) -> CollabNetwork:
        return self._commit("revoke", r)

    def query(self, q: UserQuery, privacy: PrivacyLevel | None = None) -> SocialNetwork:
        s, snap = self._state
        return query(s, q, privacy or self.level, snap)
