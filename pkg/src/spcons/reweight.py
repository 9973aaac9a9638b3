"""Edge re-weighting for H2 performance.

Minimizes ``f(W) = H2(W)**2 + (h_reg/2) * sum(w_e**2)`` over positive follower
edge weights (leader edges stay at 1). The partial derivative for an edge
``(i, j)`` is ``-1/2 * sum_s (y_i^s - y_j^s)**2 + h_reg * w_ij`` where ``y^s`` are
the node potentials for 1 A injected at input ``s`` with the leaders grounded.

Potentials come from the decomposition-tree passes when the system is
all-input series-parallel and from a dense Cholesky solve otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .electrical import solve
from .errors import InfeasibleWeights, MaxItersExceeded, NotAllInputTTSP
from .graph_core import LeaderFollowerSystem, grounded_matrix
from .h2_perf import all_input_trees, h2_single_source

__all__ = [
    "ReweightState",
    "OptimizeReport",
    "Problem",
    "objective",
    "gradient",
    "step_paper",
    "optimize",
]


def _check_feasible(W, n_edges):
    W = np.asarray(W, dtype=float).reshape(-1)
    if W.size != n_edges:
        raise InfeasibleWeights(f"expected {n_edges} weights, got {W.size}")
    if not np.all(np.isfinite(W)) or not np.all(W > 0):
        raise InfeasibleWeights("weights must be finite and strictly positive")
    return W


class Problem:
    """Objective and gradient of the re-weighting problem for one system.

    Parameters
    ----------
    sys : LeaderFollowerSystem
        Supplies the structure; its current weights are not used.
    h_reg : float
        Weight of the quadratic regularizer. Zero is allowed for evaluating
        the bare H2 term; :func:`optimize` needs it positive.
    method : {"auto", "tree", "dense"}
        ``"tree"`` requires an all-input series-parallel system and raises
        :class:`NotAllInputTTSP` otherwise; ``"auto"`` falls back to dense.
    """

    def __init__(self, sys: LeaderFollowerSystem, h_reg: float = 1.0, method: str = "auto"):
        if method not in ("auto", "tree", "dense"):
            raise ValueError(f"unknown method {method!r}")
        if not h_reg >= 0:
            raise ValueError("h_reg must be nonnegative")
        self.sys = sys
        self.h_reg = float(h_reg)
        self.trees = None
        if method != "dense":
            try:
                self.trees = all_input_trees(sys)
            except NotAllInputTTSP:
                if method == "tree":
                    raise
        self.route = "tree" if self.trees is not None else "dense"
        g = sys.followers
        self.n_edges = g.n_edges
        self._ids = g.edge_ids
        self._iu, self._iv = g.endpoints
        self._eu = np.array([e.u for e in g.edges], dtype=np.int64)
        self._ev = np.array([e.v for e in g.edges], dtype=np.int64)
        first_leader = int(self._ids.max()) + 1 if self.n_edges else 0
        self._full = np.ones(first_leader + len(sys.inputs))

    def _tree_weights(self, W):
        full = self._full.copy()
        full[self._ids] = W
        return full

    def h2_squared(self, W) -> float:
        W = _check_feasible(W, self.n_edges)
        if self.route == "tree":
            full = self._tree_weights(W)
            return sum(h2_single_source(self.trees[s], full) for s in self.sys.inputs)
        Y = self._dense_potentials(W)
        B = self.sys.input_matrix()
        return 0.5 * float(np.sum(B * Y))

    def objective(self, W) -> float:
        W = _check_feasible(W, self.n_edges)
        return self.h2_squared(W) + 0.5 * self.h_reg * float(W @ W)

    def _dense_potentials(self, W):
        A = grounded_matrix(self.sys.with_weights(W))
        return sla.cho_solve(sla.cho_factor(-A), self.sys.input_matrix())

    def voltage_gaps(self, W) -> np.ndarray:
        """``sum_s (y_i^s - y_j^s)**2`` for every follower edge ``(i, j)``."""
        W = _check_feasible(W, self.n_edges)
        if self.route == "dense":
            Y = self._dense_potentials(W)
            return np.sum((Y[self._iu] - Y[self._iv]) ** 2, axis=1)
        full = self._tree_weights(W)
        gaps = np.zeros(self.n_edges)
        for s in self.sys.inputs:
            pot = solve(self.trees[s], 1.0, weights=full).potentials
            y = np.fromiter((pot[n] for n in self._eu), float, self.n_edges)
            y -= np.fromiter((pot[n] for n in self._ev), float, self.n_edges)
            gaps += y * y
        return gaps

    def gradient(self, W) -> np.ndarray:
        W = _check_feasible(W, self.n_edges)
        return -0.5 * self.voltage_gaps(W) + self.h_reg * W


def objective(sys: LeaderFollowerSystem, W, h_reg: float = 1.0, method: str = "auto") -> float:
    return Problem(sys, h_reg, method).objective(W)


def gradient(sys: LeaderFollowerSystem, W, h_reg: float = 1.0, method: str = "auto") -> np.ndarray:
    """Analytic gradient of the objective with respect to follower edge weights."""
    return Problem(sys, h_reg, method).gradient(W)


@dataclass
class ReweightState:
    weights: np.ndarray
    t: int = 1
    h_reg: float = 1.0
    w_min: float = 1e-8
    f_history: list = field(default_factory=list)
    grad: np.ndarray | None = None


_F_RESOLUTION = 1e-13


def _projected_grad(w, g, w_min):
    at_floor = (w <= w_min * (1 + 1e-12)) & (g > 0)
    return np.where(at_floor, 0.0, g)


def step_paper(state: ReweightState, sys: LeaderFollowerSystem, problem: Problem | None = None) -> ReweightState:
    """One step of the diminishing-step weight update.

    ``w <- (1 - 1/sqrt(t)) w + (1/(2 sqrt(t))) sum_s (y_i^s - y_j^s)**2``,
    floored at ``w_min``. This is a gradient step of length ``1/sqrt(t)`` for
    ``h_reg = 1``. The objective and gradient at the pre-step weights are
    recorded on the returned state.
    """
    if state.t < 1:
        raise ValueError("iteration counter starts at 1")
    problem = problem or Problem(sys, state.h_reg)
    w = state.weights
    gaps = problem.voltage_gaps(w)
    f = problem.h2_squared(w) + 0.5 * state.h_reg * float(w @ w)
    rate = 1.0 / math.sqrt(state.t)
    new_w = np.maximum((1.0 - rate) * w + 0.5 * rate * gaps, state.w_min)
    return replace(
        state,
        weights=new_w,
        t=state.t + 1,
        f_history=state.f_history + [f],
        grad=-0.5 * gaps + state.h_reg * w,
    )


@dataclass
class OptimizeReport:
    mode: str
    route: str
    converged: bool
    iterations: int
    f: float
    grad_inf_norm: float
    f_history: list


def optimize(
    sys: LeaderFollowerSystem,
    mode: str = "projected_gradient",
    h_reg: float = 1.0,
    w_min: float = 1e-8,
    tol: float = 1e-6,
    max_iters: int = 100_000,
    w0=None,
    method: str = "auto",
    callback: Callable | None = None,
):
    """Minimize the regularized H2 objective over positive follower weights.

    Parameters
    ----------
    mode : {"projected_gradient", "paper"}
        ``"projected_gradient"`` takes projected steps with backtracking
        (Armijo) line search, so the objective never increases. Once changes in
        ``f`` fall below its rounding resolution, steps are certified by the
        slope at the trial point instead, and recorded values may then wobble
        by a few ulps. ``"paper"``
        replays the diminishing-step update of :func:`step_paper` and is only
        defined for ``h_reg == 1``.
    tol : float
        Stop once the projected gradient's max-norm is at most ``tol``.
    callback : callable, optional
        Called as ``callback(iteration, f, grad_inf_norm, weights)`` for every
        visited iterate.

    Returns
    -------
    weights : ndarray
        Final iterate, or the best one seen if ``max_iters`` was reached (a
        :class:`MaxItersExceeded` warning is issued in that case).
    report : OptimizeReport
    """
    if mode not in ("projected_gradient", "paper"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "paper" and h_reg != 1:
        raise ValueError("the diminishing-step update is defined for h_reg = 1 only")
    if not w_min > 0:
        raise ValueError("w_min must be positive")
    if not h_reg > 0:
        raise ValueError("h_reg must be positive for a bounded minimizer")
    problem = Problem(sys, h_reg, method)
    w = np.ones(problem.n_edges) if w0 is None else np.asarray(w0, dtype=float).copy()
    w = np.maximum(_check_feasible(w, problem.n_edges), w_min)

    history = []
    best_w, best_f = w, math.inf
    converged = False
    step = 1.0
    state = ReweightState(w, 1, h_reg, w_min)
    f = problem.objective(w)
    g = problem.gradient(w)
    it = 0
    for it in range(max_iters + 1):
        pg = np.abs(_projected_grad(w, g, w_min)).max(initial=0.0)
        history.append(f)
        if callback is not None:
            callback(it, f, pg, w)
        if f < best_f:
            best_w, best_f = w, f
        if pg <= tol:
            converged = True
            break
        if it == max_iters:
            break
        if mode == "paper":
            state = step_paper(replace(state, weights=w), sys, problem)
            w = state.weights
            f = problem.objective(w)
        else:
            step = min(2.0 * step, 1e6)
            g_trial = None
            while True:
                trial = np.maximum(w - step * g, w_min)
                f_trial = problem.objective(trial)
                if abs(f_trial - f) <= _F_RESOLUTION * abs(f):
                    # the change is below the resolution of f, so Armijo cannot
                    # tell overshoot from descent; by convexity a nonpositive
                    # slope at the trial point certifies f did not increase
                    g_trial = problem.gradient(trial)
                    if float(g_trial @ (trial - w)) <= 0.0:
                        break
                    g_trial = None
                elif f_trial <= f + 1e-4 * float(g @ (trial - w)):
                    break
                step *= 0.5
                if step < 1e-20:
                    trial, f_trial = w, f
                    break
            if np.array_equal(trial, w):
                # no representable descent left; treat as converged at precision limit
                converged = pg <= max(tol, 1e-12 * max(1.0, abs(f)))
                break
            w, f = trial, f_trial
            if g_trial is not None:
                g = g_trial
                continue
        g = problem.gradient(w)

    if converged:
        best_w, best_f = w, f
        final_g = np.abs(_projected_grad(w, g, w_min)).max(initial=0.0)
    else:
        final_g = np.abs(_projected_grad(best_w, problem.gradient(best_w), w_min)).max(initial=0.0)
        warnings.warn(
            f"{mode} stopped after {it} iterations with gradient norm {final_g:.3g} > tol {tol:.3g}",
            MaxItersExceeded,
            stacklevel=2,
        )
    report = OptimizeReport(mode, problem.route, converged, it, best_f, final_g, history)
    return best_w.copy(), report
