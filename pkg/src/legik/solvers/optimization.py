"""Interior-point IK: minimise a radial/position objective plus a log barrier on the joint limits."""
from __future__ import annotations

import numpy as np

from ..kinematics import fk_points, jacobian, limit_barrier
from .base import IKSolver, SolveRequest, SolveResult, SolverOptions, Stopwatch

_ARMIJO = 1e-4
_MIN_STEP = 1e-14


def tracking_objective(model, q, target, weight=1e3) -> float:
    """Radial mismatch ``|r_d - r|`` plus ``weight * |p - p_d|^2``."""
    p = fk_points(model, q)[0]
    t = np.asarray(target, dtype=float)[:2]
    radial = abs(np.hypot(*t) - np.hypot(*p))
    return float(radial + weight * np.sum((p - t) ** 2))


def barrier_objective(model, q, target, k, limits=None, weight=1e3) -> float:
    """``B_k(q) = f(q) + b(q) / k``; ``inf`` when q is on or outside a limit."""
    if k <= 0:
        raise ValueError("barrier weight k must be positive")
    lim = model.limits if limits is None else np.asarray(limits, dtype=float)
    b = limit_barrier(q, lim)
    if not np.isfinite(b):
        return float("inf")
    return tracking_objective(model, q, target, weight) + b / k


def barrier_gradient(model, q, target, k, limits=None, weight=1e3, radial=True) -> np.ndarray:
    """Gradient of :func:`barrier_objective` (subgradient 0 where r == r_d).

    ``radial=False`` drops the non-smooth radial term.
    """
    lim = model.limits if limits is None else np.asarray(limits, dtype=float)
    q = np.asarray(q, dtype=float)
    p = fk_points(model, q)[0]
    t = np.asarray(target, dtype=float)[:2]
    J = jacobian(model, q)
    r = np.hypot(*p)
    grad = 2.0 * weight * J.T @ (p - t)
    if radial and r > 0:
        grad -= np.sign(np.hypot(*t) - r) * (J.T @ p) / r
    grad += (1.0 / (lim[:, 1] - q) - 1.0 / (q - lim[:, 0])) / k
    return grad


def _line_search(model, q, d, slope, value, target, k, lim, weight):
    step = 1.0
    while step > _MIN_STEP:
        cand = q + step * d
        cval = barrier_objective(model, cand, target, k, lim, weight)
        if cval <= value + _ARMIJO * step * slope:
            return cand, cval
        step *= 0.5
    return None, value


def _minimise(model, q, target, k, lim, weight, max_iter):
    """Damped Newton descent on B_k with Armijo backtracking.

    The Hessian model is Gauss-Newton on the position penalty plus the
    exact (diagonal) barrier curvature.  The smooth direction (radial term
    left out) is tried first because it aims straight at the target; the
    full-gradient direction is the fallback.
    """
    value = barrier_objective(model, q, target, k, lim, weight)
    used = 0
    for used in range(1, max_iter + 1):
        J = jacobian(model, q)
        curv = (1.0 / (lim[:, 1] - q) ** 2 + 1.0 / (q - lim[:, 0]) ** 2) / k
        H = 2.0 * weight * J.T @ J + np.diag(curv)
        cand = None
        for radial in (False, True):
            g = barrier_gradient(model, q, target, k, lim, weight, radial=radial)
            d = -np.linalg.solve(H, g)
            slope = g @ d
            if slope >= 0:
                d, slope = -g, -(g @ g)
            cand, cval = _line_search(model, q, d, slope, value, target, k, lim, weight)
            if cand is not None:
                break
        if cand is None:
            break
        moved = np.max(np.abs(cand - q))
        q, value = cand, cval
        if moved < 1e-13:
            break
    return q, used


def optimize_ik_solve(request: SolveRequest) -> SolveResult:
    """Barrier-method tracking with warm starts.

    For each target the barrier weight grows geometrically from ``k0``;
    every outer step minimises ``B_k`` from the previous iterate.  A target
    stops early once the position error is below tolerance.
    """
    model, opts = request.model, request.options
    lim = request.limits
    q = np.asarray(request.initial_q, dtype=float).copy()
    if not np.isfinite(limit_barrier(q, lim)):
        raise ValueError("initial joint vector must be strictly inside the joint limits")
    n = len(request)
    joints = np.empty((n, 3))
    iters = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    traces = [] if opts.trace else None
    with Stopwatch() as sw:
        for i, target in enumerate(request.targets):
            k = opts.barrier_k0
            outer_errors = []
            for _ in range(opts.barrier_outer):
                q, used = _minimise(model, q, target, k, lim, opts.penalty_weight, opts.max_iterations)
                iters[i] += used
                err = float(np.hypot(*(fk_points(model, q)[0] - target)))
                outer_errors.append(err)
                if err < opts.position_tolerance:
                    converged[i] = True
                    break
                k *= opts.barrier_growth
            joints[i] = q
            if traces is not None:
                traces.append(outer_errors)
    return SolveResult.from_joints("opt", model, request.targets, joints, iters, converged, sw.elapsed, traces)


class BarrierIKSolver(IKSolver):
    method = "opt"

    def __init__(self, model=None, initial_q=None, joint_limits=None, max_iterations=200,
                 position_tolerance=1e-6, barrier_k0=1.0, barrier_growth=10.0, barrier_outer=8,
                 penalty_weight=1e3, trace=False):
        self.model = model
        self.initial_q = initial_q
        self.joint_limits = joint_limits
        self.max_iterations = max_iterations
        self.position_tolerance = position_tolerance
        self.barrier_k0 = barrier_k0
        self.barrier_growth = barrier_growth
        self.barrier_outer = barrier_outer
        self.penalty_weight = penalty_weight
        self.trace = trace

    def _options(self):
        return SolverOptions(
            max_iterations=self.max_iterations, position_tolerance=self.position_tolerance,
            barrier_k0=self.barrier_k0, barrier_growth=self.barrier_growth,
            barrier_outer=self.barrier_outer, penalty_weight=self.penalty_weight, trace=self.trace,
        )

    def _solve(self, request):
        return optimize_ik_solve(request)
