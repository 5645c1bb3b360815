"""INI-style configuration files.

Angles are degrees, lengths metres and times seconds in every file; values
are converted to radians on load.  Sections:

``[model]``        segment lengths, joint limits, comfort zones, mass model
``[trajectory]``   boundary conditions per axis, duration, sample count
``[solver]``       options shared by all numerical solvers
``[solver.NAME]``  per-method overrides, including joint limits
``[ga]``           genetic algorithm parameters
``[neural]``       dataset and training settings, or a saved network
``[comfort]``      comfort index weights
``[bench]``        methods to run, repetitions and output directory
"""
from __future__ import annotations

import configparser
from dataclasses import fields
from pathlib import Path

import numpy as np

from .kinematics import KinematicModel, ROM_DEG, default_comfort_zones
from .metrics import ComfortWeights
from .neural import DEFAULT_SAMPLES, SINGLE_BRANCH_LIMITS_DEG, TrainConfig
from .solvers.base import GAParams, SolverOptions
from .trajectory import GAIT_SWING, GAIT_DURATION, AxisBoundary, BoundaryConditions

JOINTS = ("theta1", "theta2", "theta3")

DEFAULT_CONFIG = f"""\
[model]
L1 = 0.45
L2 = 0.42
L3 = 0.12
b = 0.10
theta1_limits_deg = {ROM_DEG[0][0]}, {ROM_DEG[0][1]}
theta2_limits_deg = {ROM_DEG[1][0]}, {ROM_DEG[1][1]}
theta3_limits_deg = {ROM_DEG[2][0]}, {ROM_DEG[2][1]}
home_deg = 0, 0, 0
mass_fractions = 0.100, 0.0465, 0.0145
com_fractions = 0.433, 0.433, 0.50

[trajectory]
x = {", ".join(repr(v) for v in GAIT_SWING["x"])}
y = {", ".join(repr(v) for v in GAIT_SWING["y"])}
duration_s = {GAIT_DURATION}
n_samples = 101

[solver]
max_iterations = 200
position_tolerance = 1e-6
damping_a = 0.1
damping_b = 2
lambda_min = 1e-9
comfort_center_mode = midpoint
barrier_k0 = 1
barrier_growth = 10
barrier_outer = 8
penalty_weight = 1000
seed = 0

[ga]
population = 100
generations = 150
crossover_rate = 0.8
mutation_rate = 0.1
mutation_sigma_deg = 2
elite = 2
tournament = 3
blend_alpha = 0.5
smoothness_weight = 0.05

[neural]
samples = {DEFAULT_SAMPLES}
seed = 0
dataset_filter = knee_positive
theta1_limits_deg = {SINGLE_BRANCH_LIMITS_DEG[0][0]}, {SINGLE_BRANCH_LIMITS_DEG[0][1]}
theta2_limits_deg = {SINGLE_BRANCH_LIMITS_DEG[1][0]}, {SINGLE_BRANCH_LIMITS_DEG[1][1]}
theta3_limits_deg = {SINGLE_BRANCH_LIMITS_DEG[2][0]}, {SINGLE_BRANCH_LIMITS_DEG[2][1]}
epochs = 500
learning_rate = 0.1
momentum = 0.9
batch_size = 32
patience = 50
schedule = cosine
train = yes

[comfort]
xi = 1
mu = 1
beta = 1

[bench]
methods = ccd, mppi, lmdls, opt, mooga, nn
repetitions = 5
output_dir = bench_out
"""


def _floats(text: str, n: int | None = None) -> list:
    values = [float(v) for v in text.replace(",", " ").split()]
    if n is not None and len(values) != n:
        raise ValueError(f"expected {n} numbers, got {text!r}")
    return values


def _limits_deg(section, fallback=None):
    """Joint limits in radians from ``thetaN_limits_deg`` keys, or ``fallback``."""
    keys = [f"{j}_limits_deg" for j in JOINTS]
    if not any(k in section for k in keys):
        return fallback
    rows = []
    for i, k in enumerate(keys):
        if k in section:
            rows.append(_floats(section[k], 2))
        elif fallback is not None:
            rows.append(list(np.degrees(fallback[i])))
        else:
            rows.append(list(ROM_DEG[i]))
    return np.radians(rows)


def read(path=None, text: str | None = None) -> configparser.ConfigParser:
    """Parse a config file over the built-in defaults."""
    cp = configparser.ConfigParser()
    cp.read_string(DEFAULT_CONFIG)
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"config file not found: {p}")
        cp.read_string(p.read_text())
    if text is not None:
        cp.read_string(text)
    return cp


def model_from_config(cp) -> KinematicModel:
    s = cp["model"]
    limits = _limits_deg(s, np.radians(ROM_DEG))
    zone_keys = [f"{j}_comfort_deg" for j in JOINTS]
    if any(k in s for k in zone_keys):
        defaults = np.degrees(default_comfort_zones(limits))
        zones = np.radians([_floats(s[k], 2) if k in s else defaults[i] for i, k in enumerate(zone_keys)])
    elif np.allclose(limits, np.radians(ROM_DEG)):
        zones = None
    else:
        zones = default_comfort_zones(limits)
    kwargs = dict(
        L1=s.getfloat("L1"), L2=s.getfloat("L2"), L3=s.getfloat("L3"), b=s.getfloat("b"),
        joint_limits=limits,
        home_position=np.radians(_floats(s["home_deg"], 3)),
        mass_fractions=_floats(s["mass_fractions"], 3),
        com_fractions=_floats(s["com_fractions"], 3),
    )
    if zones is not None:
        kwargs["comfort_zones"] = zones
    return KinematicModel(**kwargs)


def boundary_from_config(cp) -> BoundaryConditions:
    s = cp["trajectory"]
    duration = s.getfloat("duration_s")
    if duration <= 0:
        raise ValueError("trajectory duration must be positive")
    return BoundaryConditions(AxisBoundary(*_floats(s["x"], 6)), AxisBoundary(*_floats(s["y"], 6)), 0.0, duration)


def ga_from_config(cp) -> GAParams:
    s = cp["ga"]
    return GAParams(
        population=s.getint("population"), generations=s.getint("generations"),
        crossover_rate=s.getfloat("crossover_rate"), mutation_rate=s.getfloat("mutation_rate"),
        mutation_sigma=float(np.radians(s.getfloat("mutation_sigma_deg"))), elite=s.getint("elite"),
        tournament=s.getint("tournament"), blend_alpha=s.getfloat("blend_alpha"),
        smoothness_weight=s.getfloat("smoothness_weight"),
    )


_OPTION_TYPES = {f.name: f.type for f in fields(SolverOptions)}


def _apply_options(section, base: SolverOptions) -> SolverOptions:
    changes = {}
    for key, raw in section.items():
        if key not in _OPTION_TYPES or key in ("ga",):
            continue
        kind = _OPTION_TYPES[key]
        if kind == "int":
            changes[key] = int(float(raw))
        elif kind == "float":
            changes[key] = float(raw)
        elif kind == "bool":
            changes[key] = section.getboolean(key)
        else:
            changes[key] = raw.strip()
    return base.replace(**changes)


def solver_options_from_config(cp, method: str | None = None) -> SolverOptions:
    # keys of [solver] with no matching option (e.g. limits) are ignored here
    opts = _apply_options(cp["solver"], SolverOptions(ga=ga_from_config(cp)))
    name = f"solver.{method}"
    if method is not None and cp.has_section(name):
        opts = _apply_options(cp[name], opts)
    return opts


def method_limits_from_config(cp, method: str):
    name = f"solver.{method}"
    if not cp.has_section(name) or not any(f"{j}_limits_deg" in cp[name] for j in JOINTS):
        return None
    return _limits_deg(cp[name], _limits_deg(cp["model"], np.radians(ROM_DEG)))


def weights_from_config(cp) -> ComfortWeights:
    s = cp["comfort"]
    return ComfortWeights(s.getfloat("xi"), s.getfloat("mu"), s.getfloat("beta"))


def train_config_from_config(cp) -> TrainConfig:
    s = cp["neural"]
    return TrainConfig(
        epochs=s.getint("epochs"), learning_rate=s.getfloat("learning_rate"),
        momentum=s.getfloat("momentum"), batch_size=s.getint("batch_size"),
        patience=s.getint("patience"), seed=s.getint("seed"), schedule=s.get("schedule").strip(),
    )


def neural_limits_from_config(cp):
    return _limits_deg(cp["neural"], np.radians(SINGLE_BRANCH_LIMITS_DEG))


def methods_from_config(cp) -> tuple:
    return tuple(m.strip() for m in cp["bench"]["methods"].replace(",", " ").split() if m.strip())
