"""H2 performance of leader-follower consensus from decomposition trees.

For a single-leader system whose leader sits at one terminal and whose only
input is the other terminal, the squared H2 norm of a 1-path of weight ``w`` is
``1/(2w)``. Series joins add these values and parallel joins parallel-add them,
so one bottom-up pass gives the norm of any series-parallel graph. For several
leaders, every input contributes half its effective resistance to the
grounded leader set, computed on the tree rooted at that input.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .electrical import effective_resistance, leaf_weights, parallel_add
from .errors import MissingTree, NotAllInputTTSP, NotSeriesParallel
from .graph_core import LeaderFollowerSystem
from .sp_decomp import LEAF, SERIES, DecompTree, decompose

__all__ = [
    "H2Value",
    "h2_series",
    "h2_parallel",
    "h2_single_source",
    "all_input_trees",
    "grounded_weights",
    "h2_all_input",
    "h2_via_resistance",
]


@dataclass(frozen=True)
class H2Value:
    """Squared H2 norm and each input node's share of it."""

    squared: float
    per_source: dict = field(default_factory=dict)


def h2_series(a: float, b: float) -> float:
    return a + b


def h2_parallel(a: float, b: float) -> float:
    return parallel_add(a, b)


def h2_single_source(t: DecompTree, weights=None) -> float:
    """Squared H2 norm with one terminal grounded and the other as sole input.

    Always equals half the source-to-sink effective resistance of ``t``.
    """
    ar = t.arena
    w = leaf_weights(t, weights)
    val = np.empty(len(ar.kind))
    for i, k in enumerate(ar.kind):
        if k == LEAF:
            val[i] = 0.5 / w[i]
        elif k == SERIES:
            val[i] = h2_series(val[ar.left[i]], val[ar.right[i]])
        else:
            val[i] = h2_parallel(val[ar.left[i]], val[ar.right[i]])
    return float(val[-1])


def all_input_trees(sys: LeaderFollowerSystem) -> dict[int, DecompTree]:
    """Decompose the grounded graph once per input, from the input to the ground.

    Raises
    ------
    NotAllInputTTSP
        If the grounded graph is not series-parallel between some input and
        the identified leader node.
    """
    g, ground = sys.grounded_graph()
    trees = {}
    for s in sys.inputs:
        try:
            trees[s] = decompose(g, s, ground)
        except NotSeriesParallel as exc:
            raise NotAllInputTTSP(
                f"grounded graph is not series-parallel between input {s} and the leaders"
            ) from exc
    return trees


def grounded_weights(sys: LeaderFollowerSystem) -> np.ndarray:
    """Edge-id indexed conductances of the grounded graph (leader edges are 1)."""
    g, _ = sys.grounded_graph()
    ids = g.edge_ids
    w = np.ones(int(ids.max()) + 1 if ids.size else 0)
    w[ids] = g.weights
    return w


def _tree_for(trees, s):
    try:
        return trees[s]
    except KeyError:
        raise MissingTree(f"no decomposition tree for input {s}") from None


def h2_all_input(
    sys: LeaderFollowerSystem,
    trees: dict[int, DecompTree] | None = None,
    jobs: int = 1,
) -> H2Value:
    """Squared H2 norm of an all-input series-parallel system as a per-input sum.

    ``trees`` maps each input node to a decomposition of the grounded graph with
    that input as one terminal and the leader node as the other; they are built
    with :func:`all_input_trees` when omitted. Leaf weights are taken from the
    system, so trees stay valid across weight updates.
    """
    if trees is None:
        trees = all_input_trees(sys)
    w = grounded_weights(sys)
    work = [(s, _tree_for(trees, s)) for s in sys.inputs]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            vals = list(pool.map(lambda item: h2_single_source(item[1], w), work))
    else:
        vals = [h2_single_source(t, w) for _, t in work]
    per_source = {s: v for (s, _), v in zip(work, vals)}
    return H2Value(squared=float(sum(vals)), per_source=per_source)


def h2_via_resistance(sys: LeaderFollowerSystem, trees: dict[int, DecompTree] | None = None) -> H2Value:
    """Same quantity as half the tree-pass effective resistance of each input."""
    if trees is None:
        trees = all_input_trees(sys)
    w = grounded_weights(sys)
    per_source = {s: 0.5 * effective_resistance(_tree_for(trees, s), w) for s in sys.inputs}
    return H2Value(squared=float(sum(per_source.values())), per_source=per_source)
