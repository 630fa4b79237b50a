import pytest

from collabanon.equivalence import EquivalencePartition, stable_refinement
from collabanon.errors import PartitionError, UnsatisfiableError
from collabanon.graph import SocialNetwork
from collabanon.hierarchy import LabelHierarchy
from collabanon.kanon import KAnonConfig, verify_k_anonymity
from collabanon.ldiversity import LDivConfig, check_l_diversity, diversity_partition, enforce_k_and_l, enforce_l_diversity
from oracles import classes_of, literal_signatures, random_graph


def one_class(values):
    g = SocialNetwork({i: "A" for i in range(len(values))}, [], dict(enumerate(values)))
    return g, EquivalencePartition.from_groups("refinement", [range(len(values))])


def test_check_examples():
    g, p = one_class(["flu", "flu", "cancer"])
    assert check_l_diversity(g, p, LDivConfig(2)).overall
    g, p = one_class(["flu", "flu", "flu"])
    rep = check_l_diversity(g, p, LDivConfig(2))
    assert not rep.overall and rep.offending_classes == [1]
    assert check_l_diversity(g, p, LDivConfig(1)).overall


def test_unvalued_flagged_not_counted():
    g = SocialNetwork({0: "A", 1: "A", 2: "A"}, [], {0: "x", 1: "y"})
    rep = check_l_diversity(g, EquivalencePartition.from_groups("refinement", [[0, 1, 2]]), LDivConfig(3))
    assert not rep.overall and rep.rows[0].distinct == 2 and rep.unvalued == [2]


def test_partition_must_cover():
    g = SocialNetwork({0: "A", 1: "A"}, [], {0: "x", 1: "y"})
    with pytest.raises(PartitionError):
        check_l_diversity(g, EquivalencePartition.from_groups("refinement", [[0]]), LDivConfig(2))


def test_render_lines():
    g, p = one_class(["a", "b"])
    assert check_l_diversity(g, p, LDivConfig(2)).render() == "class 1 size=2 distinct=2 pass=true\nl-diverse: true"


def test_config_validation():
    with pytest.raises(ValueError):
        LDivConfig(0)
    with pytest.raises(ValueError):
        LDivConfig(2, variant="entropy")


def test_already_diverse_unchanged():
    g, _ = one_class(["a", "b", "a"])
    out, rep = enforce_l_diversity(g, LDivConfig(2))
    assert out == g and rep.overall and rep.edges_added == 0


def test_two_singletons_merge():
    g = SocialNetwork({0: "A", 1: "B"}, [], {0: "a", 1: "b"})
    assert len(diversity_partition(g)) == 2
    out, rep = enforce_l_diversity(g, LDivConfig(2))
    assert rep.overall and len(rep.rows) == 1
    assert rep.rows[0].members == (0, 1)
    assert out.labels[0] == out.labels[1] == "*"


def test_unsatisfiable():
    g, _ = one_class(["a", "a"])
    with pytest.raises(UnsatisfiableError):
        enforce_l_diversity(g, LDivConfig(2))


@pytest.mark.parametrize("l", [2, 3])
def test_soundness_random(rng, l):
    h = LabelHierarchy.flat("AB")
    for _ in range(6):
        g = random_graph(rng, 25, 0.12, "AB", ["s1", "s2", "s3", "s4"])
        out, rep = enforce_l_diversity(g, LDivConfig(l), h=h)
        assert rep.overall
        # judged on an independently computed stable partition
        istar, _ = stable_refinement(out)
        for cls in classes_of(literal_signatures(out, istar + 1)):
            assert len({out.sensitive[v] for v in cls if v in out.sensitive}) >= l
        assert g.edges <= out.edges
        assert all(h.is_ancestor_or_self(out.labels[v], g.labels[v]) for v in g)
        assert g.sensitive == out.sensitive


def test_k_floor(rng):
    g = random_graph(rng, 20, 0.15, "AB", ["s1", "s2", "s3"])
    _, rep = enforce_l_diversity(g, LDivConfig(2), KAnonConfig(k=4))
    assert rep.overall and all(r.size >= 4 for r in rep.rows)


def test_check_is_read_only(rng):
    g = random_graph(rng, 15, 0.2, "AB", ["x", "y"])
    before = (g.edges, dict(g.labels))
    check_l_diversity(g, diversity_partition(g), LDivConfig(2))
    assert (g.edges, dict(g.labels)) == before


def test_k_and_l_together(rng):
    for _ in range(4):
        g = random_graph(rng, 24, 0.12, "AB", ["s1", "s2", "s3"])
        out = enforce_k_and_l(g, KAnonConfig(k=3), LDivConfig(2))
        assert verify_k_anonymity(out, 3)
        assert check_l_diversity(out, diversity_partition(out), LDivConfig(2)).overall
