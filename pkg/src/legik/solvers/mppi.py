"""Newton-Raphson IK with the Moore-Penrose pseudo-inverse."""
from __future__ import annotations

import numpy as np

from ..kinematics import fk_points, jacobian
from .base import IKSolver, SolveRequest, SolveResult, SolverOptions, Stopwatch

SINGULAR_DET = 1e-12


class SingularJacobianError(np.linalg.LinAlgError):
    pass


def pseudo_inverse(J: np.ndarray) -> np.ndarray:
    """Right pseudo-inverse ``J^T (J J^T)^-1`` of a full-row-rank 2x3 Jacobian."""
    JJt = J @ J.T
    if abs(np.linalg.det(JJt)) < SINGULAR_DET:
        raise SingularJacobianError(f"det(J J^T) = {np.linalg.det(JJt):.3e} below {SINGULAR_DET}")
    return J.T @ np.linalg.inv(JJt)


def mppi_step(model, q, target) -> np.ndarray:
    """``q + J^+(q) (target - f(q))``."""
    q = np.asarray(q, dtype=float)
    e = np.asarray(target, dtype=float) - fk_points(model, q)[0]
    J = jacobian(model, q)
    JJt = J @ J.T
    if abs(np.linalg.det(JJt)) < SINGULAR_DET:
        raise SingularJacobianError(f"det(J J^T) = {np.linalg.det(JJt):.3e} below {SINGULAR_DET}")
    return q + J.T @ np.linalg.solve(JJt, e)


def mppi_solve(request: SolveRequest) -> SolveResult:
    """Pseudo-inverse tracking.  Joint limits are deliberately not applied."""
    model, opts = request.model, request.options
    n = len(request)
    joints = np.empty((n, 3))
    iters = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    singular = np.zeros(n, dtype=bool)
    q = request.initial_q.copy()
    with Stopwatch() as sw:
        for i, target in enumerate(request.targets):
            for k in range(opts.max_iterations + 1):
                if np.hypot(*(fk_points(model, q)[0] - target)) < opts.position_tolerance:
                    converged[i] = True
                    break
                if k == opts.max_iterations:
                    break
                try:
                    q = mppi_step(model, q, target)
                except SingularJacobianError:
                    singular[i] = True
                    break
                iters[i] += 1
            joints[i] = q
    return SolveResult.from_joints("mppi", model, request.targets, joints, iters, converged,
                                   sw.elapsed, singular=singular)


class MPPISolver(IKSolver):
    method = "mppi"

    def __init__(self, model=None, initial_q=None, joint_limits=None, max_iterations=200,
                 position_tolerance=1e-6):
        self.model = model
        self.initial_q = initial_q
        self.joint_limits = joint_limits
        self.max_iterations = max_iterations
        self.position_tolerance = position_tolerance

    def _options(self):
        return SolverOptions(max_iterations=self.max_iterations, position_tolerance=self.position_tolerance)

    def _solve(self, request):
        return mppi_solve(request)
