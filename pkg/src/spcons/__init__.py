"""H2 performance of leader-follower consensus on series-parallel graphs.

Decomposition-tree passes compute effective resistances, branch currents,
node potentials and squared H2 norms in time proportional to the tree height
per layer-parallel round; :mod:`spcons.dense_oracle` recomputes each quantity
with dense linear algebra for cross-checking.
"""

from .errors import *  # noqa: F401,F403
from .graph_core import (
    Edge,
    LeaderFollowerSystem,
    WeightedGraph,
    build_graph,
    grounded_matrix,
    incidence,
    laplacian,
)
from .sp_decomp import (
    DecompTree,
    TreeStats,
    decompose,
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
from .electrical import (
    ElectricalSolution,
    branch_currents,
    current_split,
    effective_resistance,
    node_potentials,
    parallel_add,
    round_count,
    solve,
    voltage_drops,
)
from .h2_perf import (
    H2Value,
    all_input_trees,
    h2_all_input,
    h2_parallel,
    h2_series,
    h2_single_source,
    h2_via_resistance,
)
from .reweight import OptimizeReport, Problem, ReweightState, gradient, objective, optimize, step_paper

__version__ = "0.1.0"
