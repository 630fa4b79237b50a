import json
import random
import threading

import pytest

from collabanon.collab import (
    CollabNetwork,
    CollabStore,
    PartyNetwork,
    PrivacyLevel,
    UserQuery,
    anonymize,
    flatten,
    merge,
    parse_contribution,
    query,
    revoke,
    serialize_contribution,
)
from collabanon.errors import NetworkFormatError, ProvenanceError
from collabanon.graph import SocialNetwork
from collabanon.kanon import KAnonConfig, verify_k_anonymity
from collabanon.ldiversity import LDivConfig, check_l_diversity, diversity_partition
from collabanon.neighborhood import canonical_neighborhood
from oracles import brute_isomorphic

P1 = "v 1 A\nv 2 B s=flu\ne 1 2\na 1 name=alice\na 1 city=Paris\na 2 name=bob\n"


def contribution(party, people, edges, rng=None):
    """people: name -> (label, attrs dict); edges between names."""
    ids = {name: i for i, name in enumerate(sorted(people))}
    lines = []
    for name, (label, attrs) in sorted(people.items()):
        lines.append(f"v {ids[name]} {label}")
        lines.append(f"a {ids[name]} name={name}")
        for k, v in attrs.items():
            lines.append(f"a {ids[name]} {k}={v}")
    lines += [f"e {ids[a]} {ids[b]}" for a, b in edges]
    return parse_contribution("\n".join(lines), party)


def test_parse_contribution():
    n = parse_contribution(P1 + "a 1 city=Lyon\n", "P1")
    assert n.values(1)["city"] == ("Paris", "Lyon")
    assert n.values(2) == {"label": ("B",), "sensitive": ("flu",), "name": ("bob",)}
    assert parse_contribution(serialize_contribution(n), "P1") == n


@pytest.mark.parametrize("text", ["v 1 A\na 2 k=v\n", "v 1 A\na 1 novalue\n", "v 1 A\na 1 =v\n"])
def test_malformed_contribution(text):
    with pytest.raises(NetworkFormatError):
        parse_contribution(text, "P")


def test_missing_identity():
    with pytest.raises(ProvenanceError):
        merge(CollabNetwork(), parse_contribution("v 1 A\n", "P"))
    with pytest.raises(ProvenanceError):
        merge(CollabNetwork(), parse_contribution("v 1 A\nv 2 A\na 1 name=x\na 2 name=x\n", "P"))


def test_bad_party():
    with pytest.raises(ProvenanceError):
        parse_contribution("v 1 A\n", "two words")


def test_merge_into_empty():
    n = parse_contribution(P1, "P1")
    s = merge(CollabNetwork(), n)
    assert s.parties == {"P1"}
    for node in s.nodes.values():
        assert all(src == {"P1"} for vals in node.attributes.values() for src in vals.values())
    assert all(e.sources == {"P1"} for e in s.edges.values())
    assert len(s.nodes) == 2 and len(s.edges) == 1


def test_merge_twice_idempotent():
    n = parse_contribution(P1, "P1")
    once = merge(CollabNetwork(), n)
    assert merge(once, n) == once


def test_merge_adds_sources_and_new_attributes():
    s = merge(CollabNetwork(), parse_contribution("v 1 A\na 1 name=alice\na 1 city=Paris\n", "P1"))
    s = merge(s, parse_contribution("v 1 A\na 1 name=alice\na 1 city=Paris\na 1 job=chef\n", "P2"))
    node = s.nodes[s.find(("alice",))]
    assert node.attributes["city"]["Paris"] == {"P1", "P2"}
    assert node.attributes["job"]["chef"] == {"P2"}
    assert len(s.nodes) == 1


def test_conflicting_values_kept_apart():
    s = merge(CollabNetwork(), parse_contribution("v 1 A\na 1 name=al\na 1 city=Paris\n", "P1"))
    s = merge(s, parse_contribution("v 1 A\na 1 name=al\na 1 city=Rome\n", "P2"))
    node = s.nodes[s.find(("al",))]
    assert dict(node.attributes["city"]) == {"Paris": {"P1"}, "Rome": {"P2"}}


def test_revoke_shared_attribute_keeps_other_source():
    s = merge(CollabNetwork(), parse_contribution("v 1 A\na 1 name=al\na 1 city=Paris\n", "P1"))
    p2 = parse_contribution("v 1 A\na 1 name=al\na 1 city=Paris\n", "P2")
    s2 = revoke(merge(s, p2), p2)
    assert s2.nodes[s2.find(("al",))].attributes["city"]["Paris"] == {"P1"}
    assert s2 == s


def test_revoke_sole_contributor_restores():
    base = merge(CollabNetwork(), parse_contribution(P1, "P1"))
    n = parse_contribution("v 5 C\nv 6 C\ne 5 6\na 5 name=carol\na 6 name=dan\n", "P2")
    assert revoke(merge(base, n), n) == base
    assert revoke(merge(CollabNetwork(), n), n) == CollabNetwork()


def test_revoke_out_of_scope_unchanged():
    s = merge(CollabNetwork(), parse_contribution(P1, "P1"))
    s = merge(s, parse_contribution("v 1 Z\na 1 name=zed\n", "P2"))
    other = parse_contribution("v 1 A\na 1 name=alice\n", "P2")
    assert revoke(s, other) == s


def test_revoke_unknown_party():
    s = merge(CollabNetwork(), parse_contribution(P1, "P1"))
    with pytest.raises(ProvenanceError):
        revoke(s, parse_contribution(P1, "P9"))


def test_revoke_drops_edges_of_deleted_nodes():
    s = merge(CollabNetwork(), parse_contribution(P1, "P1"))
    s = merge(s, parse_contribution("v 1 A\nv 2 C\ne 1 2\na 1 name=alice\na 2 name=eve\n", "P2"))
    s = revoke(s, parse_contribution("v 2 C\na 2 name=eve\n", "P2"))
    assert s.find(("eve",)) is None
    assert all(s.find(("eve",)) not in e for e in s.edges)
    assert len(s.edges) == 1


def test_invariants_checked():
    from collabanon.collab import ProvenancedEdge

    with pytest.raises(ProvenanceError):
        CollabNetwork(edges=[ProvenancedEdge((0, 1), frozenset({"P"}))])


def test_flatten_examples():
    assert len(flatten(CollabNetwork())) == 0
    s = merge(CollabNetwork(), parse_contribution(P1, "P1"))
    s = merge(s, parse_contribution("v 1 A\nv 3 C\ne 1 3\na 1 name=alice\na 3 name=carl\n", "P2"))
    flat = flatten(s)
    assert len(flat) == len(s.nodes) and flat.number_of_edges() == len(s.edges)
    assert "alice" not in flat.labels.values()


def test_flatten_round_trip(rng):
    for _ in range(10):
        n = random_party(rng, "P1", [f"p{i}" for i in range(rng.randint(1, 7))])
        flat = flatten(merge(CollabNetwork(), n))
        assert brute_isomorphic(flat, n.network)
        ca, _ = canonical_neighborhood(flat.adjacency, flat.labels, flat.vertices)
        g = n.network
        cb, _ = canonical_neighborhood(g.adjacency, g.labels, g.vertices)
        assert ca == cb


def test_flatten_missing_label():
    with pytest.raises(ProvenanceError):
        flatten(merge(CollabNetwork(), parse_contribution(P1, "P1")), label_key="city")


def random_party(rng, party, names, p=0.4):
    people = {nm: (rng.choice("AB"), {"city": rng.choice(["Rome", "Oslo"])}) for nm in names}
    edges = [(a, b) for a, b in zip(sorted(names), sorted(names)[1:]) if rng.random() < p]
    return contribution(party, people, edges)


def test_disjoint_commutative(rng):
    for _ in range(10):
        a = random_party(rng, "P1", ["a1", "a2", "a3"])
        b = random_party(rng, "P2", ["b1", "b2"])
        assert merge(merge(CollabNetwork(), a), b) == merge(merge(CollabNetwork(), b), a)


def six_node_store(tmp_path=None):
    people = {
        "ann": ("A", {"city": "Rome"}),
        "bo": ("A", {"city": "Oslo"}),
        "cy": ("B", {"city": "Rome"}),
        "di": ("B", {"city": "Rome"}),
        "ed": ("A", {"city": "Oslo"}),
        "fay": ("B", {"city": "Oslo"}),
    }
    edges = [("ann", "bo"), ("bo", "cy"), ("cy", "di"), ("di", "ed"), ("ed", "fay"), ("fay", "ann")]
    return contribution("P1", people, edges)


def test_query_examples():
    level = PrivacyLevel(KAnonConfig(k=2))
    s = merge(CollabNetwork(), six_node_store())
    snap = anonymize(s, level)
    assert len(query(s, UserQuery.parse(["city=Nowhere"]), level, snap)) == 0
    full = query(s, UserQuery.parse(["label=A"]), level, snap)
    # hand membership: ann, bo, ed carry label A
    assert len(full) == 3
    everyone = s.nodes.keys()
    all_ids = [snap._where[i] for i in everyone]
    assert query(s, UserQuery.parse(["city=Rome"]), level, snap) == snap.published.induced_subgraph(
        snap._where[s.find((nm,))] for nm in ("ann", "cy", "di")
    )
    assert snap.published.induced_subgraph(all_ids) == snap.published
    assert verify_k_anonymity(snap.published, 2)


def test_query_refusals():
    level = PrivacyLevel(KAnonConfig(k=2))
    s = merge(CollabNetwork(), six_node_store())
    with pytest.raises(ProvenanceError):
        query(s, UserQuery.parse(["city=Rome"]), level, None)
    snap = anonymize(s, level)
    with pytest.raises(ProvenanceError):
        query(s, UserQuery.parse(["city=Rome"]), PrivacyLevel(KAnonConfig(k=3)), snap)
    with pytest.raises(ProvenanceError):
        query(s, UserQuery.parse(["name=ann"]), level, snap)
    with pytest.raises(ProvenanceError):
        UserQuery(())
    with pytest.raises(ProvenanceError):
        UserQuery.parse(["nokey"])


def test_snapshot_hides_identity():
    s = merge(CollabNetwork(), six_node_store())
    snap = anonymize(s, PrivacyLevel(KAnonConfig(k=2)))
    labels = set(snap.published.labels.values())
    assert not labels & {"ann", "bo", "cy", "di", "ed", "fay"}


def test_store_log_replay(tmp_path):
    path = tmp_path / "store.jsonl"
    level = PrivacyLevel(KAnonConfig(k=2), LDivConfig(2))
    store = CollabStore(path, level)
    a = parse_contribution(
        "v 1 A s=x\nv 2 A s=y\nv 3 B s=x\ne 1 2\ne 2 3\na 1 name=a\na 2 name=b\na 3 name=c\n", "P1"
    )
    b = parse_contribution("v 1 B s=y\nv 2 A s=z\ne 1 2\na 1 name=c\na 2 name=d\n", "P2")
    store.merge(a)
    store.merge(b)
    store.revoke(parse_contribution("v 2 A s=z\na 2 name=d\n", "P2"))
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r["op"] for r in records] == ["merge", "merge", "revoke"]
    again = CollabStore(path, level)
    assert again.network == store.network
    assert again.snapshot.published == store.snapshot.published
    pub = store.snapshot.published
    assert verify_k_anonymity(pub, 2)
    assert check_l_diversity(pub, diversity_partition(pub), LDivConfig(2)).overall


def test_store_corrupt_log(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"op": "merge"}\n')
    with pytest.raises(NetworkFormatError):
        CollabStore(path)


def test_store_readers_see_whole_states():
    store = CollabStore(level=PrivacyLevel(KAnonConfig(k=2)))
    seen = []

    def reader():
        for _ in range(200):
            s, snap = store._state
            if snap is not None:
                seen.append(len(snap.published) == len(s.nodes))

    t = threading.Thread(target=reader)
    t.start()
    rng = random.Random(0)
    for i in range(8):
        store.merge(random_party(rng, f"P{i}", [f"x{i}a", f"x{i}b"]))
    t.join()
    assert all(seen)


def test_anonymize_on_merge_holds(rng):
    store = CollabStore(level=PrivacyLevel(KAnonConfig(k=2)))
    for i in range(4):
        store.merge(random_party(rng, f"P{i}", [f"n{i}{j}" for j in range(4)] + ["shared"]))
        assert verify_k_anonymity(store.snapshot.published, 2)
