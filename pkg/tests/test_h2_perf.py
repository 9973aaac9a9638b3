import numpy as np
import pytest

from spcons import (
    LeaderFollowerSystem,
    MissingTree,
    NotAllInputTTSP,
    build_graph,
    h2_all_input,
    h2_single_source,
    leaf,
    parallel,
    series,
)
from spcons import dense_oracle as oracle
from spcons.generators import random_all_input_system, random_tree
from spcons.h2_perf import all_input_trees, h2_parallel, h2_series, h2_via_resistance
from spcons.electrical import effective_resistance


@pytest.mark.parametrize(
    "tree, expected",
    [
        (leaf(0, 1, 1.0), 0.5),
        (leaf(0, 1, 2.0), 0.25),
        (series(leaf(0, 2, 1.0), leaf(2, 1, 1.0)), 1.0),
        (parallel(leaf(0, 1, 1.0), leaf(0, 1, 1.0)), 0.25),
        (parallel(series(leaf(0, 2, 1.0), leaf(2, 1, 1.0)), leaf(0, 1, 1.0)), 1 / 3),
    ],
)
def test_small_trees(tree, expected):
    assert h2_single_source(tree) == pytest.approx(expected, rel=1e-15)


def test_join_rules():
    assert h2_series(0.5, 0.5) == 1.0
    assert h2_parallel(0.5, 0.5) == 0.25


def test_half_resistance(rng):
    for _ in range(30):
        t = random_tree(rng, int(rng.integers(1, 120)))
        assert h2_single_source(t) == pytest.approx(0.5 * effective_resistance(t), rel=1e-13)


def test_doubling_weights_halves_norm(rng):
    t = random_tree(rng, 40)
    w = np.array(t.arena.w[t.arena.leaves])
    assert h2_single_source(t, 2 * w) == pytest.approx(0.5 * h2_single_source(t, w), rel=1e-13)


def test_subtree_substitution(rng):
    # replacing a subtree by a single edge with the same value leaves the total unchanged
    a, b = random_tree(rng, 12), random_tree(rng, 9)
    rest = leaf(0, 1, 0.7)
    eq_leaf = leaf(0, 1, 0.5 / h2_single_source(a))
    assert h2_single_source(parallel(series(a, b), rest)) == pytest.approx(
        h2_single_source(parallel(series(eq_leaf, b), rest)), rel=1e-13
    )


def test_two_input_anchor(two_input_system):
    val = h2_all_input(two_input_system)
    assert val.squared == pytest.approx(2 / 3, rel=1e-14)
    assert val.per_source == pytest.approx({0: 1 / 3, 1: 1 / 3}, rel=1e-14)
    assert oracle.h2_dense(two_input_system) == pytest.approx(2 / 3, rel=1e-14)


def test_lone_follower():
    sys = LeaderFollowerSystem(build_graph([], nodes=[0]), [0])
    assert h2_all_input(sys).squared == pytest.approx(0.5)


def test_random_systems_all_routes(rng):
    for _ in range(40):
        sys = random_all_input_system(rng, int(rng.integers(1, 9)))
        ref = oracle.h2_dense(sys)
        trees = all_input_trees(sys)
        assert h2_all_input(sys, trees).squared == pytest.approx(ref, rel=1e-10)
        assert h2_via_resistance(sys, trees).squared == pytest.approx(ref, rel=1e-10)
        assert oracle.h2_gramian(sys) == pytest.approx(ref, rel=1e-9)


def test_parallel_jobs_match(rng):
    sys = random_all_input_system(rng, 6)
    assert h2_all_input(sys, jobs=4).squared == h2_all_input(sys).squared


def test_trees_survive_weight_changes(rng):
    sys = random_all_input_system(rng, 4)
    trees = all_input_trees(sys)
    new = sys.with_weights(rng.uniform(0.2, 5.0, sys.followers.n_edges))
    assert h2_all_input(new, trees).squared == pytest.approx(oracle.h2_dense(new), rel=1e-10)


def test_missing_tree(rng):
    sys = random_all_input_system(rng, 3)
    trees = all_input_trees(sys)
    trees.pop(sys.inputs[0])
    with pytest.raises(MissingTree):
        h2_all_input(sys, trees)


def test_not_all_input():
    # path 0-1-2 with inputs at both ends and the middle: grounded graph
    # contains a K4-like obstruction from the middle input
    g = build_graph([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)])
    sys = LeaderFollowerSystem(g, [0, 3])
    with pytest.raises(NotAllInputTTSP):
        all_input_trees(sys)
