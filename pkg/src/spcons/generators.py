"""Random and structured trees and systems for tests, benchmarks and checks."""

from __future__ import annotations

import numpy as np

from .graph_core import LeaderFollowerSystem, WeightedGraph
from .sp_decomp import PARALLEL, SERIES, DecompTree, Join, Leaf, _join, leaf, parallel, realize, series

__all__ = [
    "log_uniform_weights",
    "random_tree",
    "balanced_tree",
    "chain_tree",
    "random_all_input_system",
    "random_connected_system",
]


def _rng(seed_or_rng):
    return seed_or_rng if isinstance(seed_or_rng, np.random.Generator) else np.random.default_rng(seed_or_rng)


def log_uniform_weights(rng, size, low=0.1, high=10.0):
    rng = _rng(rng)
    return np.exp(rng.uniform(np.log(low), np.log(high), size))


def random_tree(rng, n_leaves: int, p_parallel: float = 0.5, low=0.1, high=10.0) -> DecompTree:
    """Tree with a uniformly random shape among all full binary trees on ``n_leaves``.

    Shapes come from Rémy's insertion algorithm; each join is parallel with
    probability ``p_parallel``; weights are log-uniform in ``[low, high]``.
    Leaves carry placeholder labels, so realizations use fresh node ids.
    """
    rng = _rng(rng)
    if n_leaves < 1:
        raise ValueError("need at least one leaf")
    # node 0 is the first leaf; parent[-1] marks the root
    parent = [-1]
    children: list[list[int]] = [[]]
    root = 0
    for _ in range(n_leaves - 1):
        x = int(rng.integers(len(parent)))
        y, z = len(parent), len(parent) + 1
        parent += [parent[x], y]
        children += [[], []]
        children[y] = [x, z] if rng.random() < 0.5 else [z, x]
        px = parent[x]
        if px == -1:
            root = y
        else:
            children[px][children[px].index(x)] = y
        parent[x] = y
    weights = log_uniform_weights(rng, n_leaves, low, high)
    kinds = np.where(rng.random(len(parent)) < p_parallel, PARALLEL, SERIES)

    built = {}
    leaf_no = 0
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        kids = children[node]
        if not kids:
            built[node] = Leaf(0, 1, float(weights[leaf_no]), leaf_no)
            leaf_no += 1
        elif expanded:
            built[node] = _join(int(kinds[node]), built.pop(kids[0]), built.pop(kids[1]))
        else:
            stack += [(node, True), (kids[1], False), (kids[0], False)]
    return DecompTree(built[root])


def balanced_tree(n_leaves: int, rng=None, p_parallel: float = 0.5) -> DecompTree:
    """Tree of height ``ceil(log2(n_leaves))``; join kinds alternate unless ``rng`` is given."""
    rng = None if rng is None else _rng(rng)
    counter = iter(range(n_leaves))

    def build(n, depth):
        if n == 1:
            w = 1.0 if rng is None else float(log_uniform_weights(rng, 1)[0])
            return leaf(0, 1, w, next(counter))
        a = build((n + 1) // 2, depth + 1)
        b = build(n // 2, depth + 1)
        if rng is None:
            par = depth % 2 == 0
        else:
            par = rng.random() < p_parallel
        return parallel(a, b) if par else series(a, b)

    return build(n_leaves, 0)


def chain_tree(n_leaves: int, kind: str = "series", rng=None) -> DecompTree:
    """Left-leaning caterpillar of height ``n_leaves - 1``.

    ``kind`` is ``"series"``, ``"parallel"`` or ``"alternate"``.
    """
    rng = None if rng is None else _rng(rng)

    def w():
        return 1.0 if rng is None else float(log_uniform_weights(rng, 1)[0])

    t = leaf(0, 1, w(), 0)
    for k in range(1, n_leaves):
        if kind == "series":
            op = series
        elif kind == "parallel":
            op = parallel
        else:
            op = series if k % 2 else parallel
        t = op(t, leaf(0, 1, w(), k))
    return t


def random_all_input_system(rng, n_inputs: int, max_leaves: int = 40) -> LeaderFollowerSystem:
    """Random leader-follower system that is series-parallel from every input.

    The grounded graph is a parallel bundle of branches between the leader
    node and a far node ``y``; each branch is a unit leader edge to a fresh
    input followed by a random series-parallel piece ending at ``y``, and one
    branch may be a direct leader edge to ``y`` (making ``y`` an input). With a
    single input the only such system is a lone follower.
    """
    rng = _rng(rng)
    if n_inputs < 1:
        raise ValueError("need at least one input")
    if n_inputs == 1:
        return LeaderFollowerSystem(WeightedGraph([0], []), [0])
    direct = rng.random() < 0.3
    budget = max(1, (max_leaves - n_inputs) // n_inputs)
    branches = []
    for _ in range(n_inputs - int(direct)):
        body = random_tree(rng, int(rng.integers(1, budget + 1)), p_parallel=float(rng.uniform(0.2, 0.8)))
        branches.append(_join(SERIES, Leaf(0, 1, 1.0), body.root))
    if direct:
        branches.append(Leaf(0, 1, 1.0))
    order = rng.permutation(len(branches))
    bundle = branches[order[0]]
    for k in order[1:]:
        bundle = _join(PARALLEL, bundle, branches[k])
    g, ground, _ = realize(DecompTree(bundle), keep_labels=False)
    inputs, edges = [], []
    for e in g.edges:
        if ground in (e.u, e.v):
            inputs.append(e.v if e.u == ground else e.u)
        else:
            edges.append((e.u - 1, e.v - 1, e.w))
    followers = WeightedGraph(
        range(g.n_nodes - 1), [(i, u, v, w) for i, (u, v, w) in enumerate(edges)]
    )
    return LeaderFollowerSystem(followers, sorted(s - 1 for s in inputs))


def random_connected_system(rng, n_nodes: int, n_edges: int, n_inputs: int) -> LeaderFollowerSystem:
    """Random connected follower graph (spanning tree plus extra edges)."""
    rng = _rng(rng)
    if n_edges < n_nodes - 1:
        raise ValueError("too few edges for a connected graph")
    perm = rng.permutation(n_nodes)
    edges = [(int(perm[i]), int(perm[rng.integers(i)])) for i in range(1, n_nodes)]
    while len(edges) < n_edges:
        u, v = rng.choice(n_nodes, 2, replace=False)
        edges.append((int(u), int(v)))
    w = log_uniform_weights(rng, len(edges))
    g = WeightedGraph(range(n_nodes), [(i, u, v, w[i]) for i, (u, v) in enumerate(edges)])
    inputs = sorted(int(s) for s in rng.choice(n_nodes, n_inputs, replace=False))
    return LeaderFollowerSystem(g, inputs)
