"""Request/result types shared by every IK solver, and the estimator base class."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..kinematics import KinematicModel, comfort_centers, fk_points
from ..validation import check_joint_limits, check_joint_vector, check_targets


@dataclass(frozen=True)
class GAParams:
    population: int = 100
    generations: int = 150
    crossover_rate: float = 0.8
    mutation_rate: float = 0.1
    mutation_sigma: float = float(np.radians(2.0))
    elite: int = 2
    tournament: int = 3
    blend_alpha: float = 0.5
    # metres of position error per radian of joint motion away from the previous solution
    smoothness_weight: float = 0.05

    def __post_init__(self):
        if not (0 <= self.crossover_rate <= 1 and 0 <= self.mutation_rate <= 1):
            raise ValueError("GA rates must lie in [0, 1]")
        if self.population < 2 or self.generations < 0:
            raise ValueError("population must be >= 2 and generations >= 0")
        if not 0 <= self.elite < self.population:
            raise ValueError("elite count must be in [0, population)")
        if self.smoothness_weight < 0:
            raise ValueError("smoothness weight must be >= 0")
        if self.tournament < 1:
            raise ValueError("tournament size must be >= 1")


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 200
    position_tolerance: float = 1e-6
    # damped least squares
    damping_a: float = 0.1
    damping_b: float = 2.0
    lambda_min: float = 1e-9
    comfort_center_mode: str = "midpoint"
    # log-barrier optimisation
    barrier_k0: float = 1.0
    barrier_growth: float = 10.0
    barrier_outer: int = 8
    penalty_weight: float = 1e3
    ga: GAParams = field(default_factory=GAParams)
    seed: int = 0
    # record per-update diagnostics in SolveResult.trace
    trace: bool = False

    def __post_init__(self):
        if self.position_tolerance <= 0:
            raise ValueError("position_tolerance must be positive")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")
        if self.damping_a <= 0 or self.damping_b <= 0:
            raise ValueError("damping constants a and b must be positive")
        if self.barrier_k0 <= 0 or self.barrier_growth <= 1 or self.barrier_outer < 1:
            raise ValueError("barrier schedule needs k0 > 0, growth > 1 and at least one outer step")

    def replace(self, **changes) -> "SolverOptions":
        return replace(self, **changes)


@dataclass
class SolveRequest:
    model: KinematicModel
    targets: np.ndarray
    initial_q: np.ndarray
    joint_limits: np.ndarray | None = None
    options: SolverOptions = field(default_factory=SolverOptions)
    orientations: np.ndarray | None = None

    def __post_init__(self):
        self.targets = check_targets(self.targets)
        self.initial_q = check_joint_vector(self.initial_q)
        if self.joint_limits is not None:
            self.joint_limits = check_joint_limits(self.joint_limits)
        if self.orientations is not None:
            self.orientations = np.asarray(self.orientations, dtype=float).ravel()
            if len(self.orientations) != len(self.targets):
                raise ValueError("one orientation per target is required")

    @property
    def limits(self) -> np.ndarray:
        return self.model.limits if self.joint_limits is None else self.joint_limits

    def __len__(self) -> int:
        return len(self.targets)


@dataclass
class SolveResult:
    """Per-target output of one solver run.

    Build it with :meth:`from_joints`; position errors are always recomputed
    from forward kinematics rather than taken from the solver.
    """

    method: str
    joint_trajectory: np.ndarray
    position_errors: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    elapsed: float
    trace: list | None = None
    info: dict = field(default_factory=dict)

    @classmethod
    def from_joints(cls, method, model, targets, joints, iterations, converged, elapsed,
                    trace=None, **info) -> "SolveResult":
        joints = np.asarray(joints, dtype=float).reshape(-1, 3)
        targets = np.asarray(targets, dtype=float).reshape(-1, 2)
        if len(joints) != len(targets):
            raise ValueError("one joint vector per target is required")
        errors = np.linalg.norm(fk_points(model, joints) - targets, axis=1)
        return cls(
            method=method,
            joint_trajectory=joints,
            position_errors=errors,
            iterations=np.asarray(iterations, dtype=int),
            converged=np.asarray(converged, dtype=bool),
            elapsed=float(elapsed),
            trace=trace,
            info=info,
        )

    @property
    def rmse(self) -> float:
        return float(np.sqrt(np.mean(self.position_errors**2)))

    def __len__(self) -> int:
        return len(self.joint_trajectory)


class Stopwatch:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False


class IKSolver(BaseEstimator):
    """Estimator-style wrapper around a request-level solve function.

    ``fit`` binds the kinematic model and joint limits; ``predict`` maps an
    (n, 2) array of target positions to an (n, 3) array of joint angles,
    warm-starting each target from the previous one.  ``score`` returns the
    negative position RMSE so that larger is better.
    """

    method = "base"

    def _solve(self, request: SolveRequest) -> SolveResult:
        raise NotImplementedError

    def _options(self) -> SolverOptions:
        return SolverOptions()

    def fit(self, X=None, y=None):
        self.model_ = self.model if self.model is not None else KinematicModel()
        self.limits_ = self.model_.limits if self.joint_limits is None else check_joint_limits(self.joint_limits)
        self.initial_q_ = None if self.initial_q is None else check_joint_vector(self.initial_q)
        self.options_ = self._options()
        return self

    def _request(self, X, orientations=None) -> SolveRequest:
        check_is_fitted(self, "model_")
        X = check_targets(X)
        q0 = self.initial_q_
        if q0 is None:
            q0 = start_posture(self.model_, X[0], self.limits_)
        return SolveRequest(self.model_, X, q0, self.joint_limits, self.options_, orientations)

    def solve(self, X) -> SolveResult:
        return self._solve(self._request(X))

    def predict(self, X) -> np.ndarray:
        return self.solve(X).joint_trajectory

    def score(self, X, y=None) -> float:
        return -self.solve(X).rmse


def start_posture(model: KinematicModel, target, limits=None) -> np.ndarray:
    """Posture reaching ``target`` with the ankle at its comfort centre, knee flexed.

    Falls back to the comfort centres of all joints when that posture is
    unreachable or outside the limits.
    """
    from .analytical import OutOfReachError, ik_fixed_ankle

    lim = model.limits if limits is None else np.asarray(limits, dtype=float)
    centres = comfort_centers(model)
    try:
        q = ik_fixed_ankle(model, target, centres[2])
    except OutOfReachError:
        q = None
    if q is None or np.any(q <= lim[:, 0]) or np.any(q >= lim[:, 1]):
        return np.clip(centres, lim[:, 0], lim[:, 1])
    return q
