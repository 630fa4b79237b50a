import itertools

import pytest

from collabanon.errors import InvalidGraphError, NetworkFormatError, UnknownLabelError
from collabanon.hierarchy import LabelHierarchy, generalize_label, parse_hierarchy

GEO = "Europe *\nFrance Europe\nSpain Europe\nAsia *\nJapan Asia\n"


@pytest.fixture
def geo():
    return parse_hierarchy(GEO)


def test_identity_and_root(geo):
    assert generalize_label(geo, "France", "France") == "France"
    assert generalize_label(geo, "France", "*") == "*"


def test_lca_siblings(geo):
    assert generalize_label(geo, "France", "Spain") == "Europe"
    assert generalize_label(geo, "France", "Japan") == "*"


def test_semilattice_laws(geo):
    labels = sorted(geo.nodes)
    for a, b, c in itertools.product(labels, repeat=3):
        ab = generalize_label(geo, a, b)
        assert ab == generalize_label(geo, b, a)
        assert generalize_label(geo, ab, c) == generalize_label(geo, a, generalize_label(geo, b, c))
        assert generalize_label(geo, a, a) == a


def test_unknown_label(geo):
    with pytest.raises(UnknownLabelError):
        generalize_label(geo, "France", "Mars")


def test_heights(geo):
    assert geo.height_between("France", "France") == 0
    assert geo.height_between("France", "*") == 2
    assert geo.is_ancestor_or_self("Europe", "Spain")
    assert not geo.is_ancestor_or_self("Asia", "Spain")
    with pytest.raises(InvalidGraphError):
        geo.height_between("France", "Asia")


def test_flat_only_root():
    h = LabelHierarchy.flat(["A", "B"])
    assert generalize_label(h, "A", "B") == "*"


def test_bad_hierarchies():
    with pytest.raises(NetworkFormatError):
        parse_hierarchy("a b\nb a\n")
    with pytest.raises(NetworkFormatError):
        parse_hierarchy("a *\na *\n")
    with pytest.raises(NetworkFormatError):
        parse_hierarchy("a b c\n")


def test_round_trip_text(geo):
    assert parse_hierarchy(geo.to_text()).parent == geo.parent
