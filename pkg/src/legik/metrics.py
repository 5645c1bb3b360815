"""Tracking accuracy and posture-comfort metrics for joint trajectories."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .kinematics import KinematicModel, fk_points, joint_positions, limit_barrier_rows
from .validation import check_joint_array, check_targets, check_uniform_grid

# Third-derivative stencils, in units of 1/h^3; all second-order accurate.
_CENTRAL = np.array([-0.5, 1.0, 0.0, -1.0, 0.5])        # f[i-2] .. f[i+2]
_FORWARD = np.array([-2.5, 9.0, -12.0, 7.0, -1.5])      # f[i] .. f[i+4]
_FORWARD_1 = np.array([-1.5, 5.0, -6.0, 3.0, -0.5])     # f[i-1] .. f[i+3]
_BACKWARD = -_FORWARD[::-1]                             # f[i-4] .. f[i]
_BACKWARD_1 = -_FORWARD_1[::-1]                         # f[i-3] .. f[i+1]
_FIRST_ORDER = np.array([-1.0, 3.0, -3.0, 1.0])


@dataclass(frozen=True)
class ComfortWeights:
    """Homogenisation weights of the comfort index (jerk, CoM distance, barrier)."""

    xi: float = 1.0
    mu: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if min(self.xi, self.mu, self.beta) < 0:
            raise ValueError("comfort weights must be non-negative")


def rmse(joint_traj, targets, model: KinematicModel) -> float:
    """Root mean square Euclidean toe-position error, metres."""
    Q = check_joint_array(joint_traj, "joint_traj")
    T = check_targets(targets)
    if len(Q) != len(T):
        raise ValueError("joint trajectory and targets must have equal length")
    err2 = np.sum((fk_points(model, Q) - T) ** 2, axis=1)
    return float(np.sqrt(np.mean(err2)))


def joint_jerk(joint_traj, sample_times) -> np.ndarray:
    """Third time derivative of every joint by finite differences.

    Interior samples use the central five-point stencil, the first and last
    two samples use one-sided stencils of the same order.  Four samples
    fall back to the first-order four-point difference.
    """
    Q = check_joint_array(joint_traj, "joint_traj")
    h = check_uniform_grid(sample_times)
    n = len(Q)
    if len(np.ravel(sample_times)) != n:
        raise ValueError("one sample time per joint vector is required")
    if n < 4:
        raise ValueError("jerk needs at least 4 samples")
    if n == 4:
        return np.tile(_FIRST_ORDER @ Q, (4, 1)) / h**3
    out = np.empty_like(Q)
    for i in range(2, n - 2):
        out[i] = _CENTRAL @ Q[i - 2:i + 3]
    out[0] = _FORWARD @ Q[0:5]
    out[1] = _FORWARD_1 @ Q[0:5]
    out[n - 1] = _BACKWARD @ Q[n - 5:n]
    out[n - 2] = _BACKWARD_1 @ Q[n - 5:n]
    return out / h**3


def jerk_series(joint_traj, sample_times) -> np.ndarray:
    """Per-sample sum of absolute joint jerks, rad/s^3."""
    return np.sum(np.abs(joint_jerk(joint_traj, sample_times)), axis=1)


def jerk_energy(joint_traj, sample_times) -> float:
    """Time mean of the summed absolute joint jerks."""
    return float(np.mean(jerk_series(joint_traj, sample_times)))


def com_position(model: KinematicModel, q) -> np.ndarray:
    """Mass-weighted centre of mass of thigh, shank and foot in the hip frame."""
    pts = joint_positions(model, q)
    frac = np.asarray(model.com_fractions)[:, None]
    seg_com = pts[:-1] + frac * (pts[1:] - pts[:-1])
    m = np.asarray(model.mass_fractions)
    return m @ seg_com / m.sum()


def com_distance(model: KinematicModel, q) -> float:
    """Distance of the lower-limb centre of mass from the hip, metres."""
    return float(np.hypot(*com_position(model, q)))


def barrier_term(model: KinematicModel, q, limits=None) -> float:
    """Log-barrier proximity of ``q`` to the joint limits; ``inf`` on or past a limit."""
    lim = model.limits if limits is None else limits
    return float(limit_barrier_rows(np.atleast_2d(q), lim)[0])


def comfort_series(model, joint_traj, sample_times, weights=ComfortWeights(), limits=None) -> np.ndarray:
    Q = check_joint_array(joint_traj, "joint_traj")
    lim = model.limits if limits is None else limits
    total = weights.xi * jerk_series(Q, sample_times)
    total = total + weights.mu * np.array([com_distance(model, q) for q in Q])
    if weights.beta > 0:
        total = total + weights.beta * limit_barrier_rows(Q, lim)
    return total


def comfort_index(model, joint_traj, sample_times, weights=ComfortWeights(), limits=None) -> float:
    """Time mean of ``xi * sum|jerk| + mu * D_CoM + beta * barrier``.

    Infinite as soon as one sample touches a joint limit (with ``beta > 0``);
    with ``beta == 0`` the barrier term is left out entirely.
    """
    return float(np.mean(comfort_series(model, joint_traj, sample_times, weights, limits)))


@dataclass
class MetricsReport:
    rmse: float
    jerk_energy: float
    com_distance_mean: float
    barrier_mean: float
    comfort_index: float
    xi: float = 1.0
    mu: float = 1.0
    beta: float = 1.0

    def to_dict(self) -> dict:
        return {k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsReport":
        return cls(**{k: float(v) for k, v in data.items()})


def evaluate(model, joint_traj, targets, sample_times, weights=ComfortWeights(), limits=None) -> MetricsReport:
    Q = check_joint_array(joint_traj, "joint_traj")
    lim = model.limits if limits is None else limits
    barrier = limit_barrier_rows(Q, lim)
    return MetricsReport(
        rmse=rmse(Q, targets, model),
        jerk_energy=jerk_energy(Q, sample_times),
        com_distance_mean=float(np.mean([com_distance(model, q) for q in Q])),
        barrier_mean=float(np.mean(barrier)),
        comfort_index=comfort_index(model, Q, sample_times, weights, lim),
        xi=weights.xi, mu=weights.mu, beta=weights.beta,
    )
