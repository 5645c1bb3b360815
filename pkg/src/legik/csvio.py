"""CSV readers and writers for workspace samples, plans, solver results and datasets.

Floats are written with ``repr`` so every value round-trips exactly.
Angles are stored in degrees.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .kinematics import WorkspaceSamples
from .trajectory import TrajectoryPlan, plan_from_samples

WORKSPACE_HEADER = ("theta1_deg", "theta2_deg", "theta3_deg", "x_m", "y_m")
PLAN_HEADER = ("t_s", "x_m", "y_m", "vx", "vy", "ax", "ay")
RESULT_HEADER = ("t_s", "theta1_deg", "theta2_deg", "theta3_deg", "err_m", "iters", "converged")
ERROR_HEADER = ("t_s", "err_m")
DATASET_HEADER = ("x_m", "y_m", "theta1_rad", "theta2_rad", "theta3_rad", "split")
COMPARISON_HEADER = ("method", "time_s", "rmse_m", "comfort_index")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def read_rows(path, header) -> list:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        got = tuple(next(reader, ()))
        if got != tuple(header):
            raise ValueError(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
        return [row for row in reader if row]


def _numeric(path, header) -> np.ndarray:
    rows = read_rows(path, header)
    return np.array(rows, dtype=float).reshape(-1, len(header))


def write_workspace(path, samples: WorkspaceSamples) -> Path:
    data = np.column_stack([np.degrees(samples.joints), samples.points])
    return write_rows(path, WORKSPACE_HEADER, data.tolist())


def read_workspace(path) -> WorkspaceSamples:
    a = _numeric(path, WORKSPACE_HEADER)
    return WorkspaceSamples(np.radians(a[:, :3]), a[:, 3:])


def write_plan(path, plan: TrajectoryPlan) -> Path:
    return write_rows(path, PLAN_HEADER, np.column_stack([plan.sample_times, plan.samples]).tolist())


def read_plan(path, orientation=None) -> TrajectoryPlan:
    a = _numeric(path, PLAN_HEADER)
    if len(a) < 2:
        raise ValueError(f"{path}: a plan needs at least 2 samples")
    return plan_from_samples(a[:, 0], a[:, 1:], orientation)


def write_result(path, times, result) -> Path:
    """Write a :class:`SolveResult` against the plan's sample times."""
    deg = np.degrees(result.joint_trajectory)
    rows = [
        (t, *q, e, int(it), bool(c))
        for t, q, e, it, c in zip(times, deg, result.position_errors, result.iterations, result.converged)
    ]
    return write_rows(path, RESULT_HEADER, rows)


def read_result(path) -> dict:
    a = _numeric(path, RESULT_HEADER)
    return {
        "t_s": a[:, 0],
        "joints": np.radians(a[:, 1:4]),
        "err_m": a[:, 4],
        "iters": a[:, 5].astype(int),
        "converged": a[:, 6].astype(bool),
    }


def write_errors(path, times, errors) -> Path:
    return write_rows(path, ERROR_HEADER, zip(times, errors))


def read_errors(path) -> np.ndarray:
    return _numeric(path, ERROR_HEADER)


def write_dataset(path, data) -> Path:
    # rows go out split by split, in index order, so a reloaded dataset
    # yields identical training batches
    rows = (
        (*data.inputs[i], *data.outputs[i], name)
        for name in ("train", "validation", "test")
        for i in getattr(data, name)
    )
    return write_rows(path, DATASET_HEADER, rows)


def read_dataset(path):
    from .neural import Dataset

    rows = read_rows(path, DATASET_HEADER)
    a = np.array([r[:5] for r in rows], dtype=float)
    split = np.array([r[5] for r in rows])
    idx = {name: np.flatnonzero(split == name) for name in ("train", "validation", "test")}
    return Dataset(a[:, :2], a[:, 2:], idx["train"], idx["validation"], idx["test"])
