import itertools
import random

import pytest

from collabanon._kernels import min_dfs_code_ext, min_dfs_code_py
from collabanon.errors import ComponentTooLargeError, InvalidGraphError, UnknownVertexError
from collabanon.graph import SocialNetwork
from collabanon.neighborhood import (
    canonical_neighborhood,
    codes_equal_iso,
    extract_neighborhood,
    min_dfs_code,
    neighborhood_code,
    vertex_codes,
)
from oracles import brute_isomorphic, brute_min_dfs_code, random_connected, random_graph, relabel


def uniform(n, edges, label="A"):
    return SocialNetwork({i: label for i in range(n)}, edges)


def test_isolated_vertex_empty_neighborhood():
    g = uniform(2, [])
    nb = extract_neighborhood(g, 0, 1)
    assert len(nb.subgraph) == 0 and nb.components() == []
    assert neighborhood_code(nb).components == ()


def test_star_center_four_components():
    g = uniform(5, [(0, i) for i in range(1, 5)])
    nb = extract_neighborhood(g, 0, 1)
    assert len(nb.components()) == 4
    assert nb.subgraph.number_of_edges() == 0


def test_path_leaf_radius_two():
    g = SocialNetwork({0: "a", 1: "b", 2: "c"}, [(0, 1), (1, 2)])
    nb = extract_neighborhood(g, 0, 2)
    assert nb.subgraph.vertices == {1, 2}
    assert nb.subgraph.edges == {(1, 2)}
    assert len(nb.components()) == 1


def test_radius_one_is_adjacency(rng):
    g = random_graph(rng, 25, 0.2)
    for v in g:
        assert extract_neighborhood(g, v, 1).subgraph.vertices == g.neighbors(v)


def test_neighborhood_is_induced_and_within_radius(rng):
    g = random_graph(rng, 25, 0.15)
    for v in g:
        sub = extract_neighborhood(g, v, 2).subgraph
        for a, b in itertools.combinations(sub.vertices, 2):
            assert sub.has_edge(a, b) == g.has_edge(a, b)
        for u in sub:
            assert u != v
            assert u in g.neighbors(v) or g.neighbors(u) & g.neighbors(v)


def test_extract_errors():
    g = uniform(2, [(0, 1)])
    with pytest.raises(UnknownVertexError):
        extract_neighborhood(g, 9)
    with pytest.raises(ValueError):
        extract_neighborhood(g, 0, 3)


def test_single_edge_code_orders_labels():
    code = min_dfs_code(SocialNetwork({5: "B", 9: "A"}, [(5, 9)]))
    assert code.tuples == ((0, 1, "A", "-", "B"),)
    assert code.render() == "(0,1,A,B)"


def test_triangle_code_has_one_back_edge():
    code = min_dfs_code(uniform(3, [(0, 1), (1, 2), (0, 2)]))
    assert len(code.tuples) == 3
    backward = [t for t in code.tuples if t[0] > t[1]]
    assert backward == [(2, 0, "A", "-", "A")]
    # every rooted traversal gives a code; ours is the least of them
    assert code.tuples == brute_min_dfs_code(uniform(3, [(0, 1), (1, 2), (0, 2)]))


def test_isomorphic_trees_same_code():
    a = SocialNetwork({0: "A", 1: "B", 2: "A", 3: "B", 4: "A"}, [(0, 1), (1, 2), (1, 3), (3, 4)])
    b = relabel(a, {0: 40, 1: 11, 2: 7, 3: 3, 4: 22})
    assert brute_isomorphic(a, b)
    assert min_dfs_code(a) == min_dfs_code(b)


def test_code_is_true_minimum(rng):
    for _ in range(150):
        g = random_connected(rng, rng.randint(2, 6), rng.randint(0, 5), "AB")
        assert min_dfs_code(g).tuples == brute_min_dfs_code(g)


def test_single_vertex_pseudo_tuple():
    assert min_dfs_code(SocialNetwork({4: "Q"})).tuples == ((0, 0, "Q", ".", "Q"),)


def test_code_invariant_under_relabeling(rng):
    for _ in range(50):
        g = random_connected(rng, rng.randint(2, 9), rng.randint(0, 8), "ABC")
        ids = list(range(100, 100 + len(g)))
        rng.shuffle(ids)
        assert min_dfs_code(relabel(g, dict(zip(sorted(g.labels), ids)))) == min_dfs_code(g)


def test_k3_vs_p3():
    assert not codes_equal_iso(uniform(3, [(0, 1), (1, 2), (0, 2)]), uniform(3, [(0, 1), (1, 2)]))


def test_reflexive(rng):
    g = random_connected(rng, 6, 4)
    assert codes_equal_iso(g, g)


def test_uniform_connected_graphs_up_to_five():
    # pairwise agreement with the permutation test on every connected uniform graph
    from oracles import all_connected_graphs

    reps = {}
    for g in all_connected_graphs(5, "A"):
        reps.setdefault(min_dfs_code(g), g)
    graphs = list(reps.values())
    assert len(graphs) == 1 + 1 + 2 + 6 + 21  # connected unlabeled graphs on 1..5 vertices
    for a, b in itertools.combinations(graphs, 2):
        assert not brute_isomorphic(a, b)


def test_min_dfs_code_errors():
    with pytest.raises(InvalidGraphError):
        min_dfs_code(SocialNetwork({}))
    with pytest.raises(InvalidGraphError):
        min_dfs_code(uniform(3, [(0, 1)]))
    with pytest.raises(ComponentTooLargeError):
        min_dfs_code(uniform(13, [(i, i + 1) for i in range(12)]))


def test_component_order_independent_of_discovery():
    # {single A} and {edge B-C}; ids chosen so both discovery orders occur
    a = SocialNetwork({0: "X", 1: "A", 2: "B", 3: "C"}, [(0, 1), (0, 2), (0, 3), (2, 3)])
    b = SocialNetwork({0: "X", 3: "A", 1: "B", 2: "C"}, [(0, 1), (0, 2), (0, 3), (1, 2)])
    ca = neighborhood_code(extract_neighborhood(a, 0))
    cb = neighborhood_code(extract_neighborhood(b, 0))
    assert ca == cb
    assert [c.n_vertices for c in ca.components] == [1, 2]


def test_p4_endpoints_equal_codes():
    g = uniform(4, [(0, 1), (1, 2), (2, 3)])
    codes = vertex_codes(g, 2)
    assert codes[0] == codes[3]
    assert brute_isomorphic(extract_neighborhood(g, 0, 2).subgraph, extract_neighborhood(g, 3, 2).subgraph)


def test_large_components_take_nauty_route(rng):
    # components past the exact cap are still compared exactly
    for _ in range(20):
        g = random_connected(rng, 16, 10, "AB")
        perm = list(range(len(g)))
        rng.shuffle(perm)
        h = relabel(g, dict(zip(sorted(g.labels), perm)))
        ca, _ = canonical_neighborhood(g.adjacency, g.labels, g.vertices)
        cb, _ = canonical_neighborhood(h.adjacency, h.labels, h.vertices)
        assert ca == cb
        other = random_connected(rng, 16, 10, "AB")
        co, _ = canonical_neighborhood(other.adjacency, other.labels, other.vertices)
        from oracles import to_nx
        import networkx as nx

        same = nx.is_isomorphic(to_nx(g), to_nx(other), node_match=lambda x, y: x["label"] == y["label"])
        assert (ca == co) == same


def test_regular_graphs_past_state_budget():
    # vertex-transitive graphs exhaust the exact search; the fallback must agree
    import networkx as nx

    cube = nx.convert_node_labels_to_integers(nx.hypercube_graph(3))
    mobius = nx.circulant_graph(8, [1, 4])
    a = SocialNetwork({v: "A" for v in cube}, cube.edges)
    b = SocialNetwork({v: "A" for v in mobius}, mobius.edges)
    ca = canonical_neighborhood(a.adjacency, a.labels, a.vertices, max_states=5)[0]
    cb = canonical_neighborhood(b.adjacency, b.labels, b.vertices, max_states=5)[0]
    assert ca != cb
    shuffled = relabel(a, {v: (3 * v + 1) % 8 for v in range(8)})
    assert ca == canonical_neighborhood(shuffled.adjacency, shuffled.labels, shuffled.vertices, max_states=5)[0]


@pytest.mark.skipif(min_dfs_code_ext is None, reason="compiled kernel not built")
def test_compiled_kernel_matches_python(rng):
    for _ in range(100):
        g = random_connected(rng, rng.randint(1, 10), rng.randint(0, 8), "AB")
        vs = sorted(g.labels)
        idx = {v: i for i, v in enumerate(vs)}
        rank = {l: i for i, l in enumerate(sorted(set(g.labels.values())))}
        labs = [rank[g.labels[v]] for v in vs]
        adj = [sorted(idx[w] for w in g.neighbors(v)) for v in vs]
        assert min_dfs_code_ext(labs, adj)[0] == min_dfs_code_py(labs, adj)[0]


def test_pure_fallback_backend_selectable():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "import collabanon._kernels as k; print(k.BACKEND)"],
        capture_output=True, text=True, env={**__import__("os").environ, "COLLABANON_PURE": "1"},
    )
    assert out.stdout.strip() == "python"
