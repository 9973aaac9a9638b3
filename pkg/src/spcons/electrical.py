"""Resistor-network passes over a decomposition tree.

Edges are resistors of resistance ``1/w``. A current is injected at the tree's
source and withdrawn at its sink, which is held at potential zero. Three passes
produce everything needed downstream:

1. bottom-up effective resistances (series add, parallel parallel-add),
2. top-down branch currents (series forwards, parallel splits by the
   minimum-power rule),
3. bottom-up voltage drops (leaf Ohm's law, series add, parallel agree).

Each pass is written as a sequential post-/pre-order sweep over the tree's
flat layout. Its synchronous-round cost is the tree height plus one, reported
by :func:`round_count`.

All pass functions accept ``weights``, an optional edge-id indexed override of
the leaf conductances, so that one tree can be reused while weights change.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NonPositiveInput, NonPositiveResistance, NonPositiveWeight, ParallelVoltageMismatch
from .sp_decomp import LEAF, SERIES, DecompTree, realization

__all__ = [
    "ElectricalSolution",
    "parallel_add",
    "leaf_weights",
    "effective_resistance",
    "subtree_resistances",
    "current_split",
    "branch_currents",
    "voltage_drops",
    "node_potentials",
    "solve",
    "round_count",
]

VOLTAGE_RTOL = 1e-9


def parallel_add(x: float, y: float) -> float:
    """``x : y = 1 / (1/x + 1/y)`` for positive operands."""
    if not (x > 0 and y > 0):
        raise NonPositiveInput(f"parallel addition needs positive operands, got {x!r}, {y!r}")
    return 1.0 / (1.0 / x + 1.0 / y)


def leaf_weights(t: DecompTree, weights=None) -> np.ndarray:
    """Per-row conductances of the tree layout (``nan`` on join rows).

    ``weights`` may be an array indexed by edge id or any mapping from edge id
    to weight; leaves without an edge id keep their own weight.
    """
    ar = t.arena
    if weights is None:
        return ar.w
    w = ar.w.copy()
    rows = ar.leaves[ar.edge_id[ar.leaves] >= 0]
    ids = ar.edge_id[rows]
    if isinstance(weights, np.ndarray):
        w[rows] = weights[ids]
    else:
        w[rows] = [weights[int(e)] for e in ids]
    if not np.all(w[ar.leaves] > 0):
        raise NonPositiveWeight("leaf weights must be positive")
    return w


@dataclass(frozen=True)
class ElectricalSolution:
    """Per-tree-row resistances, currents and drops; per-graph-node potentials.

    Rows follow ``t.arena``. Fields are filled in pass order, so a solution
    returned by :func:`branch_currents` has ``v_drop`` and ``potentials`` unset.
    """

    r_eff: np.ndarray
    i_total: float = 1.0
    current: np.ndarray | None = None
    v_drop: np.ndarray | None = None
    potentials: dict | None = None

    @property
    def reff(self) -> float:
        return float(self.r_eff[-1])


def subtree_resistances(t: DecompTree, weights=None) -> np.ndarray:
    """Effective resistance between the terminals of every subtree."""
    ar = t.arena
    w = leaf_weights(t, weights)
    r = np.empty(len(ar.kind))
    for i, k in enumerate(ar.kind):
        if k == LEAF:
            r[i] = 1.0 / w[i]
        elif k == SERIES:
            r[i] = r[ar.left[i]] + r[ar.right[i]]
        else:
            r[i] = parallel_add(r[ar.left[i]], r[ar.right[i]])
    return r


def effective_resistance(t: DecompTree, weights=None) -> float:
    """Source-to-sink effective resistance of the realized graph of ``t``."""
    return float(subtree_resistances(t, weights)[-1])


def current_split(i: float, r1: float, r2: float) -> tuple[float, float]:
    """Split ``i`` over two parallel resistors so dissipated power is minimal.

    Minimizing ``i1**2 r1 + i2**2 r2`` subject to ``i1 + i2 = i`` gives the
    current divider ``i1 = i r2 / (r1 + r2)``; the minimum equals
    ``i**2 * (r1 : r2)``.
    """
    if not (r1 > 0 and r2 > 0):
        raise NonPositiveResistance(f"resistances must be positive, got {r1!r}, {r2!r}")
    total = r1 + r2
    return i * r2 / total, i * r1 / total


def branch_currents(
    t: DecompTree,
    i_total: float = 1.0,
    *,
    r_eff: np.ndarray | None = None,
    weights=None,
) -> ElectricalSolution:
    """Top-down pass assigning the current through every subtree."""
    ar = t.arena
    if r_eff is None:
        r_eff = subtree_resistances(t, weights)
    cur = np.empty(len(ar.kind))
    cur[-1] = i_total
    for i in range(len(ar.kind) - 1, -1, -1):
        k = ar.kind[i]
        if k == LEAF:
            continue
        a, b = ar.left[i], ar.right[i]
        if k == SERIES:
            cur[a] = cur[b] = cur[i]
        else:
            cur[a], cur[b] = current_split(cur[i], r_eff[a], r_eff[b])
    return ElectricalSolution(r_eff=r_eff, i_total=float(i_total), current=cur)


def voltage_drops(t: DecompTree, solution: ElectricalSolution, weights=None) -> ElectricalSolution:
    """Bottom-up pass of voltage drops across every subtree.

    Raises
    ------
    ParallelVoltageMismatch
        If the two children of a parallel join disagree by more than ``1e-9``
        relative, which means the currents are inconsistent.
    """
    if solution.current is None:
        raise ValueError("branch currents must be computed first")
    ar = t.arena
    w = leaf_weights(t, weights)
    cur = solution.current
    v = np.empty(len(ar.kind))
    for i, k in enumerate(ar.kind):
        if k == LEAF:
            v[i] = cur[i] / w[i]
            continue
        va, vb = v[ar.left[i]], v[ar.right[i]]
        if k == SERIES:
            v[i] = va + vb
        else:
            scale = max(abs(va), abs(vb))
            if abs(va - vb) > VOLTAGE_RTOL * scale and scale > 0:
                raise ParallelVoltageMismatch(f"parallel join {i}: {va!r} vs {vb!r}")
            v[i] = va
    return replace(solution, v_drop=v)


def node_potentials(t: DecompTree, solution: ElectricalSolution, keep_labels=None) -> dict:
    """Potential of every realized graph node, with the sink grounded at 0.

    Node ids are those of :func:`spcons.sp_decomp.realization` with the same
    ``keep_labels`` choice.
    """
    if solution.v_drop is None:
        raise ValueError("voltage drops must be computed first")
    ar = t.arena
    term = realization(t, keep_labels).terminals
    v = solution.v_drop
    top = np.empty(len(ar.kind))  # potential at each subtree's source
    bottom = np.empty(len(ar.kind))  # potential at each subtree's sink
    top[-1], bottom[-1] = v[-1], 0.0
    pot = {int(term[-1, 0]): float(v[-1]), int(term[-1, 1]): 0.0}
    for i in range(len(ar.kind) - 1, -1, -1):
        k = ar.kind[i]
        if k == LEAF:
            continue
        a, b = ar.left[i], ar.right[i]
        if k == SERIES:
            # accumulate upward from the grounded sink: sums of nonnegative drops
            mid = bottom[i] + v[b]
            top[a], bottom[a] = top[i], mid
            top[b], bottom[b] = mid, bottom[i]
            pot[int(term[a, 1])] = float(mid)
        else:
            top[a] = top[b] = top[i]
            bottom[a] = bottom[b] = bottom[i]
    return pot


def solve(t: DecompTree, i_total: float = 1.0, weights=None, keep_labels=None) -> ElectricalSolution:
    """Run all three passes and attach node potentials."""
    sol = branch_currents(t, i_total, weights=weights)
    sol = voltage_drops(t, sol, weights=weights)
    return replace(sol, potentials=node_potentials(t, sol, keep_labels))


def round_count(t: DecompTree) -> int:
    """Synchronous rounds of one layer-parallel pass: tree height plus one."""
    return t.height + 1
