"""Closed-form IK given the toe position and the foot orientation theta0."""
from __future__ import annotations

import numpy as np

from ..kinematics import KinematicModel
from .base import SolveRequest, SolveResult, Stopwatch

KNEE_BRANCHES = ("positive", "negative")
_C2_SLACK = 1e-12


class OutOfReachError(ValueError):
    """The ankle point lies outside the thigh/shank annulus."""

    def __init__(self, distance: float, inner: float, outer: float):
        self.distance = distance
        self.inner = inner
        self.outer = outer
        super().__init__(
            f"target out of reach: ankle distance {distance:.6g} m outside [{inner:.6g}, {outer:.6g}] m"
        )


def _nearest_to_range(angle: float, lo: float, hi: float) -> float:
    mid = 0.5 * (lo + hi)
    return angle + 2.0 * np.pi * np.round((mid - angle) / (2.0 * np.pi))


def analytical_ik(model: KinematicModel, target, knee_branch: str = "positive") -> np.ndarray:
    """Joint angles reaching ``target`` with foot orientation ``target.orientation``.

    The knee angle comes from the law of cosines on the hip-ankle distance,
    with the sign of its sine picked by ``knee_branch``.  Each angle is
    returned in the 2*pi representative closest to its joint range; range
    limits are not enforced.

    Raises
    ------
    OutOfReachError
        If the ankle point is outside ``[|L1 - L2|, L1 + L2]``.
    """
    if knee_branch not in KNEE_BRANCHES:
        raise ValueError(f"knee_branch must be one of {KNEE_BRANCHES}")
    ex, ey = float(target[0]), float(target[1])
    theta0 = target[2] if len(target) > 2 else None
    if theta0 is None:
        raise ValueError("analytical IK needs the foot orientation theta0")
    theta0 = float(theta0)
    L1, L2, L3 = model.L1, model.L2, model.L3

    dx = ex - L3 * np.sin(theta0)
    dy = ey - L3 * np.cos(theta0)
    c2 = (dx * dx + dy * dy - L1 * L1 - L2 * L2) / (2.0 * L1 * L2)
    if abs(c2) > 1.0 + _C2_SLACK:
        raise OutOfReachError(float(np.hypot(dx, dy)), abs(L1 - L2), L1 + L2)
    c2 = min(1.0, max(-1.0, c2))
    s2 = np.sqrt(1.0 - c2 * c2)
    if knee_branch == "negative":
        s2 = -s2
    theta2 = np.arctan2(s2, c2)
    # The knee enters the chain negated, so the thigh leads the ankle vector
    # by atan2(L2 s2, L1 + L2 c2).
    theta1 = np.arctan2(dy, dx) + np.arctan2(L2 * s2, L1 + L2 * c2)
    theta3 = np.pi / 2 - theta1 + theta2 - theta0

    lim = model.limits
    q = [_nearest_to_range(a, lo, hi) for a, (lo, hi) in zip((theta1, theta2, theta3), lim)]
    return np.array(q)


def analytical_solve(request: SolveRequest, knee_branch: str = "positive") -> SolveResult:
    """Solve every target of ``request`` in closed form.

    Needs ``request.orientations``.  Unreachable targets are reported as
    non-converged and keep the previous solution.
    """
    if request.orientations is None:
        raise ValueError("analytical solve needs one foot orientation per target")
    joints = np.empty((len(request), 3))
    ok = np.ones(len(request), dtype=bool)
    prev = request.initial_q
    with Stopwatch() as sw:
        for i, ((x, y), th0) in enumerate(zip(request.targets, request.orientations)):
            try:
                prev = analytical_ik(request.model, (x, y, th0), knee_branch)
            except OutOfReachError:
                ok[i] = False
            joints[i] = prev
    return SolveResult.from_joints(
        "analytical", request.model, request.targets, joints,
        np.zeros(len(request), dtype=int), ok, sw.elapsed,
    )


def ik_fixed_ankle(model: KinematicModel, target, theta3: float, knee_branch: str = "positive") -> np.ndarray:
    """Joint angles reaching ``target`` with the ankle held at ``theta3``.

    With the ankle fixed, shank and foot act as one rigid link, so the
    problem reduces to a two-link chain.

    Raises
    ------
    OutOfReachError
        If the target is outside the reduced chain's annulus.
    """
    if knee_branch not in KNEE_BRANCHES:
        raise ValueError(f"knee_branch must be one of {KNEE_BRANCHES}")
    ex, ey = float(target[0]), float(target[1])
    L1 = model.L1
    w = model.L2 + model.L3 * np.exp(1j * theta3)
    s, offset = abs(w), float(np.angle(w))
    r = float(np.hypot(ex, ey))
    c = (r * r - L1 * L1 - s * s) / (2.0 * L1 * s)
    if abs(c) > 1.0 + _C2_SLACK:
        raise OutOfReachError(r, abs(L1 - s), L1 + s)
    c = min(1.0, max(-1.0, c))
    sn = np.sqrt(1.0 - c * c)
    if knee_branch == "negative":
        sn = -sn
    bend = np.arctan2(sn, c)
    theta1 = np.arctan2(ey, ex) + np.arctan2(s * sn, L1 + s * c)
    theta2 = bend + offset
    lim = model.limits
    return np.array([_nearest_to_range(a, lo, hi) for a, (lo, hi) in zip((theta1, theta2, theta3), lim)])
