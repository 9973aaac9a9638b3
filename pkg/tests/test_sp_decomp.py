import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spcons import (
    Disconnected,
    NotSeriesParallel,
    ParseError,
    SelfLoop,
    WeightedGraph,
    build_graph,
    decompose,
    effective_resistance,
    from_sexpr,
    leaf,
    parallel,
    realization,
    realize,
    reversed_tree,
    series,
    to_sexpr,
    tree_stats,
)
from spcons.generators import balanced_tree, chain_tree, random_tree
from spcons.sp_decomp import PARALLEL, SERIES, Join, Leaf


def as_nx(g, source, sink):
    G = nx.MultiGraph()
    for n in g.nodes:
        G.add_node(n, term=0)
    G.nodes[source]["term"] = 1
    G.nodes[sink]["term"] = 2
    for e in g.edges:
        G.add_edge(e.u, e.v, w=e.w)
    return G


def isomorphic(a, b):
    def edge_match(x, y):
        return sorted(d["w"] for d in x.values()) == sorted(d["w"] for d in y.values())

    return nx.is_isomorphic(
        as_nx(*a), as_nx(*b), node_match=lambda x, y: x["term"] == y["term"], edge_match=edge_match
    )


def unit():
    return leaf(0, 1, 1.0)


def stats_dict(t):
    s = tree_stats(t)
    return dict(l=s.leaves, p=s.parallel_joins, s=s.series_joins, N=s.realized_nodes, E=s.realized_edges, h=s.height, n=s.tree_nodes)


# -- construction -------------------------------------------------------------


def test_leaf():
    assert stats_dict(leaf(0, 1, 1.0)) == dict(l=1, p=0, s=0, N=2, E=1, h=0, n=1)
    assert leaf(0, 1, 2.5).root.w == 2.5
    with pytest.raises(SelfLoop):
        leaf(3, 3, 1.0)


def test_series_of_two_leaves():
    t = series(unit(), unit())
    assert stats_dict(t) == dict(l=2, p=0, s=1, N=3, E=2, h=1, n=3)
    g, s, k = realize(t)
    assert g.n_nodes == 3


def test_parallel_of_two_leaves():
    t = parallel(unit(), unit())
    assert stats_dict(t) == dict(l=2, p=1, s=0, N=2, E=2, h=1, n=3)
    g, s, k = realize(t)
    assert g.n_nodes == 2 and g.n_edges == 2
    assert {(e.u, e.v) for e in g.edges} == {(s, k)}


def test_triangle_tree():
    t = parallel(series(unit(), unit()), unit())
    assert stats_dict(t) == dict(l=3, p=1, s=1, N=3, E=3, h=2, n=5)
    lo, hi = tree_stats(t).height_bounds_by_nodes(corrected=False)
    assert (lo, hi) == (2.0, 2.0)
    g, s, k = realize(t)
    assert isomorphic((g, s, k), (build_graph([(0, 2, 1.0), (2, 1, 1.0), (0, 1, 1.0)]), 0, 1))


def test_series_associative_up_to_isomorphism():
    a, b, c = leaf(0, 1, 1.0), leaf(0, 1, 2.0), leaf(0, 1, 3.0)
    assert isomorphic(realize(series(a, series(b, c))), realize(series(series(a, b), c)))


def test_parallel_commutes_up_to_isomorphism():
    a, b = series(leaf(0, 1, 1.0), leaf(0, 1, 2.0)), leaf(0, 1, 3.0)
    assert isomorphic(realize(parallel(a, b)), realize(parallel(b, a)))


def test_height_grows_by_one():
    a = series(unit(), series(unit(), unit()))
    assert series(a, unit()).height == a.height + 1
    assert parallel(unit(), a).height == a.height + 1


def test_reversed_tree_swaps_terminals():
    t = series(leaf(0, 1, 1.0), parallel(leaf(0, 1, 2.0), leaf(0, 1, 3.0)))
    g, s, k = realize(t)
    gr, sr, kr = realize(reversed_tree(t))
    assert isomorphic((g, s, k), (gr, kr, sr))


def test_chain_height():
    for k in range(1, 8):
        t = chain_tree(k + 1)
        assert tree_stats(t).height == k
        lo, hi = tree_stats(t).height_bounds_by_edges()
        assert t.height == hi


def test_balanced_height():
    for E in (1, 2, 3, 5, 8, 13, 64, 100):
        assert balanced_tree(E).height == math.ceil(math.log2(E))


# -- realization --------------------------------------------------------------


def test_realize_leaf_keeps_labels():
    g, s, k = realize(leaf(4, 7, 2.0))
    assert (s, k) == (4, 7) and [tuple(e) for e in g.edges] == [(0, 4, 7, 2.0)]


def test_fresh_labels_when_inconsistent():
    g, s, k = realize(series(unit(), unit()))
    assert (s, k) == (0, 1) and g.nodes == (0, 1, 2)
    with pytest.raises(ValueError):
        realize(series(unit(), unit()), keep_labels=True)


def test_label_collision_falls_back_to_fresh():
    # locally consistent labels, but both middles are called 1
    path = series(leaf(0, 1, 1.0), leaf(1, 2, 1.0))
    g, _, _ = realize(parallel(path, path))
    assert g.n_nodes == 4


def test_realized_counts_match_stats(rng):
    for _ in range(200):
        t = random_tree(rng, int(rng.integers(1, 120)), p_parallel=float(rng.uniform()))
        s = tree_stats(t)
        r = realization(t)
        assert r.graph.n_nodes == s.realized_nodes == 2 * s.leaves - 2 * s.parallel_joins - s.series_joins
        assert r.graph.n_edges == s.realized_edges == s.leaves
        assert s.tree_nodes == 2 * s.leaves - 1
        assert s.bounds_hold()


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 60), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_stats_identities_and_corrected_bounds(n_leaves, p_par, seed):
    s = tree_stats(random_tree(np.random.default_rng(seed), n_leaves, p_par))
    assert s.realized_nodes == 2 * s.leaves - 2 * s.parallel_joins - s.series_joins
    assert s.tree_nodes == 2 * s.leaves - 1
    assert s.bounds_hold(corrected=True)


def test_uncorrected_node_bound_fails_for_parallel_pair():
    s = tree_stats(parallel(unit(), unit()))
    lo, _ = s.height_bounds_by_nodes(corrected=False)
    assert lo == 2.0 > s.height
    assert not s.bounds_hold(corrected=False)


# -- recognition --------------------------------------------------------------


def test_decompose_triangle(triangle):
    t = decompose(triangle, 0, 2)
    assert to_sexpr(t) == "(P (S (e 0 1 1) (e 1 2 1)) (e 0 2 1))"
    r = t.root
    assert r.kind == PARALLEL and r.left.kind == SERIES and isinstance(r.right, Leaf)


def test_decompose_four_cycle():
    g = build_graph([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])
    t = decompose(g, 0, 2)
    assert t.root.kind == PARALLEL
    assert t.root.left.kind == SERIES and t.root.right.kind == SERIES
    assert effective_resistance(t) == pytest.approx(1.0)


def test_decompose_single_edge_and_orientation():
    t = decompose(build_graph([(0, 1, 2.0)]), 1, 0)
    assert to_sexpr(t) == "(e 1 0 2)"


def test_decompose_is_deterministic(rng):
    t = random_tree(rng, 80)
    g, s, k = realize(t)
    assert to_sexpr(decompose(g, s, k)) == to_sexpr(decompose(g, s, k))


def k4():
    return build_graph([(a, b, 1.0) for a in range(4) for b in range(a + 1, 4)])


def grid3():
    edges = []
    for r in range(3):
        for c in range(3):
            n = 3 * r + c
            if c < 2:
                edges.append((n, n + 1, 1.0))
            if r < 2:
                edges.append((n, n + 3, 1.0))
    return build_graph(edges)


def wheel4():
    rim = [(i, (i % 4) + 1, 1.0) for i in range(1, 5)]
    return build_graph([(0, i, 1.0) for i in range(1, 5)] + rim)


def subdivided_k4():
    # K4 on {0,1,2,3} with edge 0-1 subdivided by 4 and 2-3 by 5
    return build_graph([(0, 4, 1.0), (4, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 5, 1.0), (5, 3, 1.0)])


@pytest.mark.parametrize(
    "graph, terminals",
    [(k4, (0, 1)), (k4, (2, 3)), (grid3, (0, 8)), (grid3, (0, 4)), (wheel4, (1, 3)), (wheel4, (0, 1)), (subdivided_k4, (4, 5))],
)
def test_rejects_non_series_parallel(graph, terminals):
    with pytest.raises(NotSeriesParallel) as info:
        decompose(graph(), *terminals)
    assert info.value.remaining_nodes >= 4


def test_rejects_dangling_vertex():
    with pytest.raises(NotSeriesParallel):
        decompose(build_graph([(0, 1, 1.0), (1, 2, 1.0)]), 0, 1)


def test_rejects_disconnected():
    with pytest.raises(Disconnected):
        decompose(build_graph([(0, 1, 1.0), (2, 3, 1.0)]), 0, 1)


def test_roundtrip_preserves_graph_and_resistance(rng):
    for _ in range(100):
        t = random_tree(rng, int(rng.integers(1, 60)), p_parallel=float(rng.uniform(0.1, 0.9)))
        g, s, k = realize(t)
        back = decompose(g, s, k)
        g2, s2, k2 = realize(back)
        assert (s2, k2) == (s, k)
        assert sorted(tuple(e) for e in g2.edges) == sorted(tuple(e) for e in g.edges)
        assert effective_resistance(back) == pytest.approx(effective_resistance(t), rel=1e-12)


def test_roundtrip_isomorphic_small(rng):
    for _ in range(30):
        t = random_tree(rng, int(rng.integers(1, 12)))
        g, s, k = realize(t)
        assert isomorphic((g, s, k), realize(decompose(g, s, k)))


# -- text format --------------------------------------------------------------


def test_sexpr_format():
    t = parallel(series(leaf(0, 2, 1.0), leaf(2, 1, 0.5)), leaf(0, 1, 3.0))
    assert to_sexpr(t) == "(P (S (e 0 2 1) (e 2 1 0.5)) (e 0 1 3))"


def test_sexpr_whitespace_insensitive():
    t = from_sexpr("( P\n  (S (e 0 2 1)(e 2 1 0.5))\t(e 0 1 3) )")
    assert to_sexpr(t) == "(P (S (e 0 2 1) (e 2 1 0.5)) (e 0 1 3))"


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=1e-300, max_value=1e300, allow_nan=False), min_size=1, max_size=12))
def test_sexpr_roundtrip_bit_exact(ws):
    t = leaf(0, 1, ws[0])
    for k, w in enumerate(ws[1:]):
        t = (series if k % 2 else parallel)(t, leaf(0, 1, w))
    back = from_sexpr(to_sexpr(t))
    assert back.arena.w[back.arena.leaves].tobytes() == t.arena.w[t.arena.leaves].tobytes()
    assert to_sexpr(back) == to_sexpr(t)


def test_sexpr_deep_chain_no_recursion_limit():
    t = chain_tree(5000)
    assert from_sexpr(to_sexpr(t)).height == 4999


@pytest.mark.parametrize("text", ["", "(e 0 1)", "(X (e 0 1 1) (e 1 2 1))", "(S (e 0 1 1))", "(e 0 1 1))", "(e 0 1 1) (e 0 1 1)"])
def test_sexpr_parse_errors(text):
    with pytest.raises(ParseError):
        from_sexpr(text)
