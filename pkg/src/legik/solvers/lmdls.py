"""Damped least squares with comfort-zone-driven per-joint damping."""
from __future__ import annotations

import numpy as np

from ..kinematics import comfort_centers, fk_points, jacobian
from .base import IKSolver, SolveRequest, SolveResult, SolverOptions, Stopwatch


def damping_factors(q, centers, limits, a, b, lambda_min=0.0) -> np.ndarray:
    """Per-joint damping ``a * (2 (q - c) / (q_max - q_min)) ** b``, floored at ``lambda_min``.

    Integer ``b`` is applied to the signed ratio, so odd ``b`` gives negative
    damping below the centre, which the floor then removes.  Non-integer
    ``b`` is applied to the magnitude.  Pinned joints (zero range) get the floor.
    """
    q = np.asarray(q, dtype=float)
    lim = np.asarray(limits, dtype=float)
    span = lim[:, 1] - lim[:, 0]
    ratio = np.divide(2.0 * (q - centers), span, out=np.zeros(3), where=span > 0)
    if float(b).is_integer():
        lam = a * ratio ** int(b)
    else:
        lam = a * np.abs(ratio) ** b
    return np.maximum(lam, lambda_min)


def lmdls_step(model, q, target, lam) -> np.ndarray:
    """One damped update.

    Equal damping uses the task-space form ``J^T (J J^T + lam I)^-1``;
    unequal damping uses the joint-space form ``(J^T J + D)^-1 J^T``.  The
    two agree when all factors are equal.
    """
    q = np.asarray(q, dtype=float)
    lam = np.asarray(lam, dtype=float)
    e = np.asarray(target, dtype=float) - fk_points(model, q)[0]
    J = jacobian(model, q)
    if np.all(lam == lam[0]):
        return q + J.T @ np.linalg.solve(J @ J.T + lam[0] * np.eye(2), e)
    return q + np.linalg.solve(J.T @ J + np.diag(lam), J.T @ e)


def lmdls_solve(request: SolveRequest) -> SolveResult:
    """Damped tracking; every update is clamped into the joint limits."""
    model, opts = request.model, request.options
    limits = request.limits
    centers = comfort_centers(model, opts.comfort_center_mode)
    n = len(request)
    joints = np.empty((n, 3))
    iters = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    q = np.clip(request.initial_q, limits[:, 0], limits[:, 1])
    with Stopwatch() as sw:
        for i, target in enumerate(request.targets):
            for k in range(opts.max_iterations + 1):
                if np.hypot(*(fk_points(model, q)[0] - target)) < opts.position_tolerance:
                    converged[i] = True
                    break
                if k == opts.max_iterations:
                    break
                lam = damping_factors(q, centers, limits, opts.damping_a, opts.damping_b, opts.lambda_min)
                q = np.clip(lmdls_step(model, q, target, lam), limits[:, 0], limits[:, 1])
                iters[i] += 1
            joints[i] = q
    return SolveResult.from_joints("lmdls", model, request.targets, joints, iters, converged, sw.elapsed)


class LMDLSSolver(IKSolver):
    method = "lmdls"

    def __init__(self, model=None, initial_q=None, joint_limits=None, max_iterations=200,
                 position_tolerance=1e-6, damping_a=0.1, damping_b=2.0, lambda_min=1e-9,
                 comfort_center_mode="midpoint"):
        self.model = model
        self.initial_q = initial_q
        self.joint_limits = joint_limits
        self.max_iterations = max_iterations
        self.position_tolerance = position_tolerance
        self.damping_a = damping_a
        self.damping_b = damping_b
        self.lambda_min = lambda_min
        self.comfort_center_mode = comfort_center_mode

    def _options(self):
        return SolverOptions(
            max_iterations=self.max_iterations, position_tolerance=self.position_tolerance,
            damping_a=self.damping_a, damping_b=self.damping_b, lambda_min=self.lambda_min,
            comfort_center_mode=self.comfort_center_mode,
        )

    def _solve(self, request):
        return lmdls_solve(request)
