"""Minimum-jerk reference trajectories in task space.

Each Cartesian axis gets its own quintic ``s0 + s1 t + ... + s5 t^5`` fitted
to position, velocity and acceleration at both ends of the motion.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_DURATION = 1e-9

# Reference swing-phase boundary values: 0.5 s motion.
GAIT_SWING = {
    "x": (0.824628, 1.33, 0.0, 0.772227, 1.33, 0.0),
    "y": (-0.0668736, 1.33, 0.0, 0.481004, 1.33, 0.0),
}
GAIT_DURATION = 0.5


@dataclass(frozen=True)
class AxisBoundary:
    """Position, velocity and acceleration at the start and end of one axis."""

    p0: float
    v0: float
    a0: float
    pf: float
    vf: float
    af: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.p0, self.v0, self.a0, self.pf, self.vf, self.af], dtype=float)


@dataclass(frozen=True)
class BoundaryConditions:
    x: AxisBoundary
    y: AxisBoundary
    t0: float = 0.0
    tf: float = GAIT_DURATION

    def __post_init__(self):
        values = np.concatenate([self.x.as_vector(), self.y.as_vector(), [self.t0, self.tf]])
        if not np.all(np.isfinite(values)):
            raise ValueError("boundary conditions must be finite")

    @classmethod
    def gait_swing(cls, duration: float = GAIT_DURATION) -> "BoundaryConditions":
        return cls(AxisBoundary(*GAIT_SWING["x"]), AxisBoundary(*GAIT_SWING["y"]), 0.0, duration)

    @property
    def duration(self) -> float:
        return self.tf - self.t0


def _constraint_matrix(t0: float, tf: float) -> np.ndarray:
    rows = []
    for t in (t0, tf):
        rows.append([1.0, t, t**2, t**3, t**4, t**5])
        rows.append([0.0, 1.0, 2 * t, 3 * t**2, 4 * t**3, 5 * t**4])
        rows.append([0.0, 0.0, 2.0, 6 * t, 12 * t**2, 20 * t**3])
    return np.array(rows)


def solve_quintic(axis: AxisBoundary, t0: float, tf: float) -> np.ndarray:
    """Quintic coefficients ``s0..s5`` matching the six boundary values.

    Raises
    ------
    ValueError
        If ``tf - t0`` is below 1e-9 s.
    """
    if not tf - t0 > MIN_DURATION:
        raise ValueError(f"degenerate time interval: tf - t0 = {tf - t0!r} s")
    M = _constraint_matrix(t0, tf)
    rhs = axis.as_vector()
    coeffs = np.linalg.solve(M, rhs)
    # One refinement step keeps the residual well under 1e-10 for t0 != 0.
    coeffs += np.linalg.solve(M, rhs - M @ coeffs)
    return coeffs


@dataclass(frozen=True)
class QuinticCoefficients:
    """Per-axis quintic coefficients, lowest order first."""

    x: np.ndarray
    y: np.ndarray

    @classmethod
    def from_boundary(cls, bc: BoundaryConditions) -> "QuinticCoefficients":
        return cls(solve_quintic(bc.x, bc.t0, bc.tf), solve_quintic(bc.y, bc.t0, bc.tf))


def evaluate(coeffs, t):
    """Position, velocity, acceleration and jerk of a quintic at ``t``.

    Uses Horner's scheme on the polynomial and its derivatives.  Accepts a
    scalar or an array of times.
    """
    c = np.asarray(coeffs, dtype=float)
    t = np.asarray(t, dtype=float)
    out = []
    for _ in range(4):
        acc = np.zeros_like(t)
        for k in c[::-1]:
            acc = acc * t + k
        out.append(acc)
        c = c[1:] * np.arange(1, len(c))
        if len(c) == 0:
            c = np.zeros(1)
    if t.ndim == 0:
        return tuple(float(v) for v in out)
    return tuple(out)


@dataclass(frozen=True)
class TrajectoryPlan:
    """Sampled minimum-jerk plan.

    ``samples`` has columns ``x, y, vx, vy, ax, ay``.
    """

    coefficients: QuinticCoefficients
    sample_times: np.ndarray
    samples: np.ndarray
    orientation: float | None = None

    @property
    def positions(self) -> np.ndarray:
        return self.samples[:, :2]

    @property
    def duration(self) -> float:
        return float(self.sample_times[-1] - self.sample_times[0])

    def __len__(self) -> int:
        return len(self.sample_times)


def generate_plan(bc: BoundaryConditions, n_samples: int = 101, orientation: float | None = None) -> TrajectoryPlan:
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    coeffs = QuinticCoefficients.from_boundary(bc)
    times = np.linspace(bc.t0, bc.tf, n_samples)
    px, vx, ax, _ = evaluate(coeffs.x, times)
    py, vy, ay, _ = evaluate(coeffs.y, times)
    samples = np.column_stack([px, py, vx, vy, ax, ay])
    return TrajectoryPlan(coeffs, times, samples, orientation)


def plan_from_samples(times, samples, orientation=None) -> TrajectoryPlan:
    """Rebuild a plan from stored samples (e.g. a plan CSV).

    Coefficients are refitted from the first and last sample states.
    """
    times = np.asarray(times, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
        raise ValueError("sample times must be strictly increasing with at least 2 entries")
    s0, sf = samples[0], samples[-1]
    bc = BoundaryConditions(
        AxisBoundary(s0[0], s0[2], s0[4], sf[0], sf[2], sf[4]),
        AxisBoundary(s0[1], s0[3], s0[5], sf[1], sf[3], sf[5]),
        float(times[0]), float(times[-1]),
    )
    return TrajectoryPlan(QuinticCoefficients.from_boundary(bc), times, samples, orientation)
