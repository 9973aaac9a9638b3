"""Dense linear-algebra reference computations.

Everything here works on assembled matrices and shares no code with the tree
passes, so agreement between the two is meaningful. Deliberately simple and
cubic in the number of nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import Disconnected, SingularA, SingularLyapunov
from .graph_core import LeaderFollowerSystem, WeightedGraph, grounded_matrix, laplacian

__all__ = [
    "DenseSystem",
    "dense_system",
    "effective_resistance_dense",
    "effective_resistance_grounded",
    "potentials_dense",
    "voltages_dense",
    "h2_dense",
    "h2_gramian",
    "h2_resistance_sum",
    "objective_dense",
    "gradient_fd",
]


@dataclass(frozen=True)
class DenseSystem:
    """Grounded dynamics matrix ``A`` and input matrix ``B`` in follower order."""

    A: np.ndarray
    B: np.ndarray
    L_full: np.ndarray | None = None


def dense_system(sys: LeaderFollowerSystem) -> DenseSystem:
    grounded, _ = sys.grounded_graph()
    return DenseSystem(grounded_matrix(sys), sys.input_matrix(), laplacian(grounded))


def _as_dense(sys) -> DenseSystem:
    return sys if isinstance(sys, DenseSystem) else dense_system(sys)


def _pinv_eigh(L: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(L)
    tol = 1e-10 * max(np.abs(vals).max(initial=0.0), 1e-300)
    keep = vals > tol
    return (vecs[:, keep] / vals[keep]) @ vecs[:, keep].T


def effective_resistance_dense(g: WeightedGraph, k: int, l: int) -> float:
    """``(e_k - e_l)^T L^+ (e_k - e_l)`` with an eigendecomposition pseudoinverse."""
    if not g.is_connected():
        raise Disconnected("graph is not connected")
    x = np.zeros(g.n_nodes)
    x[g.index(k)] += 1.0
    x[g.index(l)] -= 1.0
    return float(x @ _pinv_eigh(laplacian(g)) @ x)


def effective_resistance_grounded(g: WeightedGraph, k: int, l: int) -> float:
    """Same quantity via a Cholesky solve with node ``l`` grounded."""
    return float(potentials_dense(g, k, l)[k])


def potentials_dense(g: WeightedGraph, source: int, ground: int) -> dict:
    """Node potentials for 1 A injected at ``source`` and ``ground`` held at 0."""
    if not g.is_connected():
        raise Disconnected("graph is not connected")
    L = laplacian(g)
    gi = g.index(ground)
    keep = [i for i in range(g.n_nodes) if i != gi]
    rhs = np.zeros(len(keep))
    rhs[keep.index(g.index(source))] = 1.0
    y = sla.cho_solve(sla.cho_factor(L[np.ix_(keep, keep)]), rhs)
    pot = {g.nodes[i]: float(val) for i, val in zip(keep, y)}
    pot[ground] = 0.0
    return pot


def voltages_dense(sys: LeaderFollowerSystem, s: int) -> np.ndarray:
    """Voltage drops ``y^s`` (follower order) for 1 A injected at input ``s``.

    Solves ``(-A) y = e_s``; all entries are nonnegative.
    """
    if s not in sys.inputs:
        raise ValueError(f"{s} is not an input node")
    A = grounded_matrix(sys)
    rhs = np.zeros(A.shape[0])
    rhs[sys.followers.index(s)] = 1.0
    return sla.cho_solve(sla.cho_factor(-A), rhs)


def h2_dense(sys) -> float:
    """Squared H2 norm ``-1/2 Tr(B^T A^{-1} B)`` for the all-state output."""
    d = _as_dense(sys)
    try:
        factor = sla.cho_factor(-d.A)
    except np.linalg.LinAlgError as exc:
        raise SingularA("A is not negative definite") from exc
    return 0.5 * float(np.trace(d.B.T @ sla.cho_solve(factor, d.B)))


def h2_gramian(sys) -> float:
    """Squared H2 norm as the trace of the controllability Gramian.

    Solves ``A P + P A^T + B B^T = 0``.
    """
    d = _as_dense(sys)
    if np.max(np.linalg.eigvals(d.A).real) >= 0:
        raise SingularLyapunov("A is not Hurwitz")
    P = sla.solve_continuous_lyapunov(d.A, -d.B @ d.B.T)
    if not np.all(np.isfinite(P)):
        raise SingularLyapunov("Lyapunov solve failed")
    return float(np.trace(P))


def h2_resistance_sum(sys: LeaderFollowerSystem) -> float:
    """Half the sum of effective resistances from each input to the grounded leaders."""
    g, ground = sys.grounded_graph()
    return 0.5 * sum(effective_resistance_dense(g, s, ground) for s in sys.inputs)


def objective_dense(sys: LeaderFollowerSystem, W, h_reg: float) -> float:
    W = np.asarray(W, dtype=float)
    return h2_dense(sys.with_weights(W)) + 0.5 * h_reg * float(W @ W)


def gradient_fd(sys: LeaderFollowerSystem, W, h_reg: float, step: float = 1e-6) -> np.ndarray:
    """Central differences of the objective, step ``step * max(1, w_e)`` per edge."""
    W = np.asarray(W, dtype=float)
    grad = np.empty_like(W)
    for e in range(W.size):
        d = min(step * max(1.0, W[e]), 0.5 * W[e])
        hi, lo = W.copy(), W.copy()
        hi[e] += d
        lo[e] -= d
        grad[e] = (objective_dense(sys, hi, h_reg) - objective_dense(sys, lo, h_reg)) / (2 * d)
    return grad
