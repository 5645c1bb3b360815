"""Cyclic coordinate descent, distal joint first."""
from __future__ import annotations

import numpy as np

from ..kinematics import joint_positions, wrap_angle
from .base import IKSolver, SolveRequest, SolveResult, SolverOptions, Stopwatch

# Joint 2 enters the chain negated: raising theta2 turns the distal links clockwise.
_ROTATION_SIGN = np.array([1.0, -1.0, 1.0])


def _best_joint_value(theta, sign, delta, lo, hi, r_eff, r_tgt):
    """Joint value in [lo, hi] that brings the effector closest to the target.

    The squared distance as a function of the chain rotation ``rot`` is
    ``r_eff^2 + r_tgt^2 - 2 r_eff r_tgt cos(rot - delta)``, which has a single
    minimum on the circle.  If the unconstrained optimum is outside the
    range, the better endpoint wins.
    """
    for shift in (0.0, 2 * np.pi, -2 * np.pi):
        cand = theta + sign * delta + shift
        if lo <= cand <= hi:
            return cand

    def dist2(value):
        rot = sign * (value - theta)
        return r_eff**2 + r_tgt**2 - 2 * r_eff * r_tgt * np.cos(wrap_angle(rot - delta))

    return lo if dist2(lo) <= dist2(hi) else hi


def ccd_step(model, q, target, limits, trace=None):
    """One distal-to-proximal sweep; returns the updated joint vector."""
    q = np.array(q, dtype=float)
    target = np.asarray(target, dtype=float)
    for j in (2, 1, 0):
        pts = joint_positions(model, q)
        pivot, effector = pts[j], pts[-1]
        u = effector - pivot
        v = target - pivot
        r_eff, r_tgt = np.hypot(*u), np.hypot(*v)
        if r_eff < 1e-15 or r_tgt < 1e-15:
            continue
        delta = wrap_angle(np.arctan2(v[1], v[0]) - np.arctan2(u[1], u[0]))
        before = np.hypot(*(effector - target))
        q[j] = _best_joint_value(q[j], _ROTATION_SIGN[j], delta, limits[j, 0], limits[j, 1], r_eff, r_tgt)
        if trace is not None:
            after = np.hypot(*(joint_positions(model, q)[-1] - target))
            trace.append((j + 1, before, after))
    return q


def ccd_solve(request: SolveRequest) -> SolveResult:
    """Track every target with CCD sweeps, warm-starting from the previous solution.

    Each joint is rotated to align the pivot-effector vector with the
    pivot-target vector, then limited to its range.  A target stops once the
    position error is below tolerance or ``max_iterations`` sweeps ran.
    """
    model, opts = request.model, request.options
    limits = request.limits
    n = len(request)
    joints = np.empty((n, 3))
    iters = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    traces = [] if opts.trace else None
    q = np.clip(request.initial_q, limits[:, 0], limits[:, 1])
    with Stopwatch() as sw:
        for i, target in enumerate(request.targets):
            log = [] if opts.trace else None
            for sweep in range(opts.max_iterations + 1):
                err = np.hypot(*(joint_positions(model, q)[-1] - target))
                if err < opts.position_tolerance:
                    converged[i] = True
                    break
                if sweep == opts.max_iterations:
                    break
                q = ccd_step(model, q, target, limits, log)
                iters[i] += 1
            joints[i] = q
            if traces is not None:
                traces.append(log)
    return SolveResult.from_joints("ccd", model, request.targets, joints, iters, converged, sw.elapsed, traces)


class CCDSolver(IKSolver):
    method = "ccd"

    def __init__(self, model=None, initial_q=None, joint_limits=None, max_iterations=200,
                 position_tolerance=1e-6, trace=False):
        self.model = model
        self.initial_q = initial_q
        self.joint_limits = joint_limits
        self.max_iterations = max_iterations
        self.position_tolerance = position_tolerance
        self.trace = trace

    def _options(self):
        return SolverOptions(max_iterations=self.max_iterations,
                             position_tolerance=self.position_tolerance, trace=self.trace)

    def _solve(self, request):
        return ccd_solve(request)
