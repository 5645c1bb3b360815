"""Input validation helpers shared by solvers, metrics and the network."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array


def check_targets(targets) -> np.ndarray:
    """Return targets as a finite (n, 2) float array; n must be positive.

    Accepts an array-like of rows ``(x, y)`` or of ``PlanarPose`` objects
    (orientation is dropped).
    """
    if isinstance(targets, np.ndarray):
        arr = targets
    else:
        targets = list(targets)
        if not targets:
            raise ValueError("targets must be non-empty")
        arr = np.array([[float(t[0]), float(t[1])] for t in targets])
    arr = check_array(np.atleast_2d(arr), dtype=np.float64, ensure_2d=True, input_name="targets")
    if arr.shape[1] != 2:
        raise ValueError(f"targets must have 2 columns (x, y), got {arr.shape[1]}")
    return arr


def check_joint_array(Q, name="joints") -> np.ndarray:
    arr = check_array(np.atleast_2d(np.asarray(Q, dtype=float)), dtype=np.float64, input_name=name)
    if arr.shape[1] != 3:
        raise ValueError(f"{name} must have 3 columns, got {arr.shape[1]}")
    return arr


def check_joint_vector(q) -> np.ndarray:
    arr = np.asarray(q, dtype=float).ravel()
    if arr.shape != (3,):
        raise ValueError(f"joint vector must have 3 entries, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("joint vector must be finite")
    return arr


def check_joint_limits(limits) -> np.ndarray:
    """(3, 2) array of finite [min, max] rows; min == max pins a joint."""
    arr = np.asarray(limits, dtype=float)
    if arr.shape != (3, 2):
        raise ValueError(f"joint limits must have shape (3, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr[:, 0] > arr[:, 1]):
        raise ValueError("joint limits must be finite with min <= max")
    return arr


def check_uniform_grid(times, rtol=1e-6) -> float:
    """Return the step of a uniform, strictly increasing time grid."""
    t = np.asarray(times, dtype=float).ravel()
    if len(t) < 2:
        raise ValueError("time grid needs at least two samples")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ValueError("time grid must be strictly increasing")
    h = (t[-1] - t[0]) / (len(t) - 1)
    if np.max(np.abs(dt - h)) > rtol * h:
        raise ValueError("time grid must be uniform")
    return float(h)
