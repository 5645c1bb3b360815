"""Planar model of the right lower limb (hip, knee, ankle, big toe).

The chain follows the modified DH table of the leg: the hip angle ``theta1``
enters directly, the knee angle enters negated (``-theta2``) and the ankle
angle ``theta3`` enters directly, so the foot direction in the hip frame is
``theta1 - theta2 + theta3``.  All angles are radians internally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

# Joint range of motion, degrees.
ROM_DEG = ((-20.0, 120.0), (0.0, 118.0), (50.0, 126.0))
# Comfort zones as tabulated alongside the ROM, degrees.  Only their
# midpoints are used to place the default zones (see default_comfort_zones).
TABULATED_COMFORT_DEG = ((15.75, 39.55), (0.0, 39.55), (77.75, 103.3))
COMFORT_FRACTION = 0.35

COMFORT_CENTER_MODES = ("half_span", "midpoint")


def wrap_angle(a):
    """Wrap angles to (-pi, pi]."""
    w = np.mod(np.asarray(a, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if w.ndim == 0 else w


def default_comfort_zones(joint_limits, tabulated=None, fraction=COMFORT_FRACTION):
    """Comfort zones of width ``fraction * range``.

    Each zone is centred on the tabulated zone midpoint (or the range
    midpoint when no table is given) and shifted just enough to stay inside
    the joint range.
    """
    limits = np.asarray(joint_limits, dtype=float)
    zones = np.empty_like(limits)
    for i, (lo, hi) in enumerate(limits):
        width = fraction * (hi - lo)
        if tabulated is None:
            centre = 0.5 * (lo + hi)
        else:
            centre = 0.5 * (tabulated[i][0] + tabulated[i][1])
        zlo = min(max(centre - 0.5 * width, lo), hi - width)
        zones[i] = (zlo, zlo + width)
    return zones


def _default_limits():
    return tuple(tuple(np.radians(r)) for r in ROM_DEG)


def _default_zones():
    zones = default_comfort_zones(np.radians(ROM_DEG), np.radians(TABULATED_COMFORT_DEG))
    return tuple(tuple(z) for z in zones)


@dataclass(frozen=True)
class KinematicModel:
    """Geometry, joint ranges and mass model of the leg.

    Lengths are metres, angles radians.  Instances are immutable and can be
    shared between solver runs.
    """

    L1: float = 0.45
    L2: float = 0.42
    L3: float = 0.12
    b: float = 0.10
    joint_limits: tuple = field(default_factory=_default_limits)
    comfort_zones: tuple = field(default_factory=_default_zones)
    home_position: tuple = (0.0, 0.0, 0.0)
    mass_fractions: tuple = (0.100, 0.0465, 0.0145)
    com_fractions: tuple = (0.433, 0.433, 0.50)

    def __post_init__(self):
        for name in ("joint_limits", "comfort_zones"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3, 2):
                raise ValueError(f"{name} must have shape (3, 2), got {arr.shape}")
            object.__setattr__(self, name, tuple(tuple(float(v) for v in row) for row in arr))
        for name in ("home_position", "mass_fractions", "com_fractions"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3,):
                raise ValueError(f"{name} must have 3 entries, got shape {arr.shape}")
            object.__setattr__(self, name, tuple(float(v) for v in arr))

        if min(self.L1, self.L2, self.L3) <= 0:
            raise ValueError("segment lengths must be positive")
        lim = self.limits
        if not np.all(np.isfinite(lim)) or np.any(lim[:, 0] >= lim[:, 1]):
            raise ValueError("joint limits must satisfy min < max")
        zones = self.zones
        if np.any(zones[:, 0] > zones[:, 1]):
            raise ValueError("comfort zone min exceeds max")
        if np.any(zones[:, 0] < lim[:, 0] - 1e-12) or np.any(zones[:, 1] > lim[:, 1] + 1e-12):
            raise ValueError("comfort zones must lie inside the joint limits")
        m = np.asarray(self.mass_fractions)
        if np.any(m < 0) or not np.any(m > 0):
            raise ValueError("mass fractions must be >= 0 and not all zero")

    @property
    def lengths(self) -> np.ndarray:
        return np.array([self.L1, self.L2, self.L3])

    @property
    def limits(self) -> np.ndarray:
        """Joint limits as a (3, 2) array of [min, max]."""
        return np.array(self.joint_limits)

    @property
    def lower(self) -> np.ndarray:
        return self.limits[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.limits[:, 1]

    @property
    def zones(self) -> np.ndarray:
        return np.array(self.comfort_zones)

    @property
    def reach(self) -> float:
        return self.L1 + self.L2 + self.L3

    def with_limits(self, joint_limits) -> "KinematicModel":
        """Copy with new joint limits; comfort zones are clipped into them."""
        lim = np.asarray(joint_limits, dtype=float)
        zones = np.clip(self.zones, lim[:, :1], lim[:, 1:])
        return KinematicModel(
            L1=self.L1, L2=self.L2, L3=self.L3, b=self.b,
            joint_limits=lim, comfort_zones=zones,
            home_position=self.home_position,
            mass_fractions=self.mass_fractions, com_fractions=self.com_fractions,
        )


class JointVector(NamedTuple):
    """Generalized coordinate q = (theta1, theta2, theta3), radians."""

    theta1: float
    theta2: float
    theta3: float

    def in_range(self, model: KinematicModel) -> bool:
        q = np.asarray(self, dtype=float)
        return bool(np.all(q >= model.lower) and np.all(q <= model.upper))

    @classmethod
    def from_degrees(cls, values: Sequence[float]) -> "JointVector":
        return cls(*(float(v) for v in np.radians(values)))


class PlanarPose(NamedTuple):
    """End-effector position in the hip frame, metres.

    ``orientation`` is the foot angle relative to the transverse plane
    (theta0), used only by the analytical solver.
    """

    x: float
    y: float
    orientation: float | None = None


def foot_angle_to_orientation(phi):
    """Convert the FK foot direction ``theta1 - theta2 + theta3`` to theta0."""
    return np.pi / 2 - phi


def forward_kinematics(model: KinematicModel, q) -> PlanarPose:
    t1, t2, t3 = (float(v) for v in q)
    a1 = t1
    a2 = t1 - t2
    a3 = t1 - t2 + t3
    x = model.L3 * np.cos(a3) + model.L2 * np.cos(a2) + model.L1 * np.cos(a1)
    y = model.L3 * np.sin(a3) + model.L2 * np.sin(a2) + model.L1 * np.sin(a1)
    return PlanarPose(float(x), float(y), float(foot_angle_to_orientation(a3)))


def fk_points(model: KinematicModel, Q) -> np.ndarray:
    """Vectorised FK: (n, 3) joint array to (n, 2) toe positions."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    a1 = Q[:, 0]
    a2 = a1 - Q[:, 1]
    a3 = a2 + Q[:, 2]
    x = model.L3 * np.cos(a3) + model.L2 * np.cos(a2) + model.L1 * np.cos(a1)
    y = model.L3 * np.sin(a3) + model.L2 * np.sin(a2) + model.L1 * np.sin(a1)
    return np.column_stack([x, y])


def joint_positions(model: KinematicModel, q) -> np.ndarray:
    """Planar positions of hip, knee, ankle and toe as a (4, 2) array."""
    t1, t2, t3 = (float(v) for v in q)
    angles = np.array([t1, t1 - t2, t1 - t2 + t3])
    seg = model.lengths[:, None] * np.column_stack([np.cos(angles), np.sin(angles)])
    return np.vstack([np.zeros(2), np.cumsum(seg, axis=0)])


def jacobian(model: KinematicModel, q) -> np.ndarray:
    """2x3 Jacobian d(x, y)/d(theta1, theta2, theta3), metres per radian."""
    t1, t2, t3 = (float(v) for v in q)
    a1 = t1
    a2 = t1 - t2
    a3 = t1 - t2 + t3
    s1, s2, s3 = model.L1 * np.sin(a1), model.L2 * np.sin(a2), model.L3 * np.sin(a3)
    c1, c2, c3 = model.L1 * np.cos(a1), model.L2 * np.cos(a2), model.L3 * np.cos(a3)
    return np.array([
        [-(s1 + s2 + s3), s2 + s3, -s3],
        [c1 + c2 + c3, -(c2 + c3), c3],
    ])


def joints_from_unit(model: KinematicModel, rho, limits=None) -> np.ndarray:
    """Map unit-interval draws onto the joint ranges: q = q_min + rho (q_max - q_min)."""
    lim = model.limits if limits is None else np.asarray(limits, dtype=float)
    rho = np.asarray(rho, dtype=float)
    return lim[:, 0] + rho * (lim[:, 1] - lim[:, 0])


class WorkspaceSamples(NamedTuple):
    joints: np.ndarray  # (n, 3) radians
    points: np.ndarray  # (n, 2) metres


def sample_workspace(model: KinematicModel, n: int, seed: int = 0, limits=None) -> WorkspaceSamples:
    """Monte-Carlo workspace samples.

    Draws come from numpy's PCG64 generator (``np.random.default_rng(seed)``),
    so a seed reproduces the same sequence on every platform.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    Q = joints_from_unit(model, rng.random((n, 3)), limits)
    return WorkspaceSamples(Q, fk_points(model, Q))


def comfort_center(model: KinematicModel, joint: int, mode: str = "half_span") -> float:
    """Centre of the comfort zone of ``joint`` (1, 2 or 3), radians.

    ``half_span`` returns ``(zmax - zmin) / 2 + home``, the half width of the
    zone offset by home, which can fall outside the zone.  ``midpoint``
    returns ``(zmax + zmin) / 2 + home``.
    """
    if joint not in (1, 2, 3):
        raise ValueError(f"joint must be 1, 2 or 3, got {joint}")
    zmin, zmax = model.comfort_zones[joint - 1]
    home = model.home_position[joint - 1]
    if mode == "half_span":
        return (zmax - zmin) / 2.0 + home
    if mode == "midpoint":
        return (zmax + zmin) / 2.0 + home
    raise ValueError(f"unknown comfort centre mode {mode!r}; expected one of {COMFORT_CENTER_MODES}")


def comfort_centers(model: KinematicModel, mode: str = "midpoint") -> np.ndarray:
    return np.array([comfort_center(model, j, mode) for j in (1, 2, 3)])


def limit_barrier(q, limits) -> float:
    """Log barrier ``-sum(log(max - q) + log(q - min))``.

    Returns ``inf`` when any joint is on or outside its limits.
    """
    q = np.asarray(q, dtype=float)
    lim = np.asarray(limits, dtype=float)
    upper_gap = lim[:, 1] - q
    lower_gap = q - lim[:, 0]
    if np.any(upper_gap <= 0) or np.any(lower_gap <= 0):
        return float("inf")
    return float(-np.sum(np.log(upper_gap) + np.log(lower_gap)))


def limit_barrier_rows(Q, limits) -> np.ndarray:
    """Row-wise :func:`limit_barrier` for an (n, 3) array."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    lim = np.asarray(limits, dtype=float)
    upper_gap = lim[:, 1] - Q
    lower_gap = Q - lim[:, 0]
    out = np.full(len(Q), np.inf)
    ok = np.all(upper_gap > 0, axis=1) & np.all(lower_gap > 0, axis=1)
    out[ok] = -np.sum(np.log(upper_gap[ok]) + np.log(lower_gap[ok]), axis=1)
    return out
