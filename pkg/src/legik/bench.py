"""Benchmark harness: run every IK method on one planned trajectory and compare.

Per method the bench writes ``<out>/<method>/joints.csv``, ``errors.csv``
and ``metrics.json``; for the whole run it writes ``plan.csv``,
``comparison.csv``, ``comparison.txt`` and ``metadata.json``.
"""
from __future__ import annotations

import json
import logging
import math
import os
import statistics
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import csvio, neural
from .kinematics import KinematicModel
from .metrics import ComfortWeights, MetricsReport, evaluate
from .solvers import SOLVERS, SolveRequest, SolverOptions, start_posture
from .solvers.base import Stopwatch
from .trajectory import BoundaryConditions, TrajectoryPlan, generate_plan

log = logging.getLogger(__name__)

METHODS = ("ccd", "mppi", "lmdls", "opt", "mooga", "nn")
OUTPUT_ENV = "LEGIK_OUTPUT_DIR"


@dataclass
class NeuralSettings:
    model_path: str | None = None
    train: bool = True
    samples: int = neural.DEFAULT_SAMPLES
    seed: int = 0
    dataset_filter: str = "knee_positive"
    limits: np.ndarray = field(default_factory=lambda: np.radians(neural.SINGLE_BRANCH_LIMITS_DEG))
    train_config: neural.TrainConfig = field(default_factory=neural.TrainConfig)


@dataclass
class BenchConfig:
    model: KinematicModel = field(default_factory=KinematicModel)
    boundary: BoundaryConditions = field(default_factory=BoundaryConditions.gait_swing)
    n_samples: int = 101
    options: SolverOptions = field(default_factory=SolverOptions)
    method_options: dict = field(default_factory=dict)
    method_limits: dict = field(default_factory=dict)
    methods: tuple = METHODS
    neural: NeuralSettings = field(default_factory=NeuralSettings)
    weights: ComfortWeights = field(default_factory=ComfortWeights)
    output_dir: str = "bench_out"
    repetitions: int = 5
    parallel: bool = False

    def __post_init__(self):
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
        if not self.methods:
            raise ValueError("at least one method must be enabled")
        if self.boundary.duration <= 0:
            raise ValueError("duration must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.n_samples < 4:
            raise ValueError("n_samples must be >= 4 for the jerk estimate")

    def options_for(self, method: str) -> SolverOptions:
        return self.method_options.get(method, self.options)

    def resolved_output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_ENV) or self.output_dir)

    @classmethod
    def from_config(cls, cp) -> "BenchConfig":
        from . import config as C

        model = C.model_from_config(cp)
        nsec = cp["neural"]
        nn = NeuralSettings(
            model_path=nsec.get("model_path") or None,
            train=nsec.getboolean("train"),
            samples=nsec.getint("samples"),
            seed=nsec.getint("seed"),
            dataset_filter=nsec.get("dataset_filter").strip(),
            limits=C.neural_limits_from_config(cp),
            train_config=C.train_config_from_config(cp),
        )
        methods = C.methods_from_config(cp)
        return cls(
            model=model,
            boundary=C.boundary_from_config(cp),
            n_samples=cp["trajectory"].getint("n_samples"),
            options=C.solver_options_from_config(cp),
            method_options={m: C.solver_options_from_config(cp, m) for m in methods},
            method_limits={m: lim for m in methods if (lim := C.method_limits_from_config(cp, m)) is not None},
            methods=methods,
            neural=nn,
            weights=C.weights_from_config(cp),
            output_dir=cp["bench"].get("output_dir"),
            repetitions=cp["bench"].getint("repetitions"),
        )


@dataclass
class ComparisonRow:
    method: str
    time_s: float
    rmse_m: float
    comfort_index: float
    ok: bool = True
    error: str = ""

    def csv_fields(self) -> list:
        return [self.method] + [csvio.fmt(v) for v in (self.time_s, self.rmse_m, self.comfort_index)]


@dataclass
class BenchReport:
    rows: list
    results: dict
    metrics: dict
    plan: TrajectoryPlan
    output_dir: Path
    metadata: dict


def _solve(method: str, request: SolveRequest, mlp):
    if method == "nn":
        return neural.nn_solve(request, mlp)
    return SOLVERS[method](request)


def _run_method(method, cfg: BenchConfig, plan: TrajectoryPlan, mlp, out: Path):
    """Solve, time and score one method; returns ``(row, result, report)``."""
    try:
        limits = cfg.method_limits.get(method)
        lim = cfg.model.limits if limits is None else limits
        q0 = start_posture(cfg.model, plan.positions[0], lim)
        request = SolveRequest(cfg.model, plan.positions, q0, limits, cfg.options_for(method))
        times, result = [], None
        for _ in range(cfg.repetitions):
            with Stopwatch() as sw:
                r = _solve(method, request, mlp)
            times.append(sw.elapsed)
            result = result or r
        report = evaluate(cfg.model, result.joint_trajectory, plan.positions, plan.sample_times, cfg.weights)
        sub = out / method
        csvio.write_result(sub / "joints.csv", plan.sample_times, result)
        csvio.write_errors(sub / "errors.csv", plan.sample_times, result.position_errors)
        (sub / "metrics.json").write_text(report.to_json() + "\n")
        row = ComparisonRow(method, statistics.median(times), report.rmse, report.comfort_index)
        return row, result, report
    except Exception as exc:  # a failing method must not abort the bench
        log.warning("method %s failed: %s", method, exc)
        detail = "".join(traceback.format_exception_only(type(exc), exc)).strip()
        return ComparisonRow(method, math.nan, math.nan, math.nan, ok=False, error=detail), None, None


def _neural_model(cfg: BenchConfig, out: Path):
    """Load or train the network; returns ``(mlp, train_time_s)``."""
    s = cfg.neural
    if s.model_path and Path(s.model_path).is_file():
        return neural.load(s.model_path), 0.0
    if s.model_path and not s.train:
        raise FileNotFoundError(f"network file not found: {s.model_path}")
    if not s.train:
        raise ValueError("the nn method needs a model_path or train = yes")
    with Stopwatch() as sw:
        data = neural.generate_dataset(cfg.model, s.samples, s.seed, s.limits, s.dataset_filter)
        mlp, _ = neural.train(neural.init_mlp(data, s.train_config.seed), data, s.train_config)
    (out / "nn").mkdir(parents=True, exist_ok=True)
    neural.save(mlp, out / "nn" / "model.txt")
    return mlp, sw.elapsed


def format_table(rows) -> str:
    lines = [f"{'method':<8} {'time_s':>12} {'rmse_m':>14} {'comfort_index':>16}"]
    for r in rows:
        if not r.ok:
            lines.append(f"{r.method:<8} FAILED: {r.error}")
            continue
        lines.append(f"{r.method:<8} {r.time_s:>12.6f} {r.rmse_m:>14.6e} {r.comfort_index:>16.6g}")
    return "\n".join(lines) + "\n"


def run_bench(cfg: BenchConfig) -> BenchReport:
    out = cfg.resolved_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    plan = generate_plan(cfg.boundary, cfg.n_samples)
    csvio.write_plan(out / "plan.csv", plan)

    metadata = {
        "methods": list(cfg.methods),
        "repetitions": cfg.repetitions,
        "n_samples": cfg.n_samples,
        "duration_s": cfg.boundary.duration,
        "seed": cfg.options.seed,
        "weights": {"xi": cfg.weights.xi, "mu": cfg.weights.mu, "beta": cfg.weights.beta},
        "failures": {},
    }
    mlp = None
    if "nn" in cfg.methods:
        try:
            mlp, metadata["train_time_s"] = _neural_model(cfg, out)
        except Exception as exc:
            log.warning("network unavailable: %s", exc)
            metadata["failures"]["nn"] = str(exc)

    ordered = [m for m in METHODS if m in cfg.methods]
    runnable = [m for m in ordered if not (m == "nn" and mlp is None)]
    if cfg.parallel and len(runnable) > 1:
        with ProcessPoolExecutor(max_workers=min(len(runnable), os.cpu_count() or 1)) as pool:
            futures = {m: pool.submit(_run_method, m, cfg, plan, mlp, out) for m in runnable}
            outcomes = {m: f.result() for m, f in futures.items()}
    else:
        outcomes = {m: _run_method(m, cfg, plan, mlp, out) for m in runnable}

    rows, results, reports = [], {}, {}
    for m in ordered:
        if m not in outcomes:
            rows.append(ComparisonRow(m, math.nan, math.nan, math.nan, ok=False,
                                      error=metadata["failures"].get(m, "not run")))
            continue
        row, result, report = outcomes[m]
        rows.append(row)
        if row.ok:
            results[m], reports[m] = result, report
        else:
            metadata["failures"][m] = row.error

    csvio.write_rows(out / "comparison.csv", csvio.COMPARISON_HEADER, (r.csv_fields() for r in rows))
    (out / "comparison.txt").write_text(format_table(rows))
    (out / "metadata.json").write_text(json.dumps(metadata, indent=2) + "\n")
    return BenchReport(rows, results, reports, plan, out, metadata)


def read_comparison(path) -> list:
    return [
        ComparisonRow(r[0], float(r[1]), float(r[2]), float(r[3]), ok=not math.isnan(float(r[2])))
        for r in csvio.read_rows(path, csvio.COMPARISON_HEADER)
    ]


def load_metrics(path) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(Path(path).read_text()))
