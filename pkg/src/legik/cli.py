"""Command line entry point: ``legik {workspace,plan,solve,train,bench,plots}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as C
from . import csvio, neural
from .bench import METHODS, OUTPUT_ENV, BenchConfig, run_bench
from .kinematics import fk_points, sample_workspace
from .plots import emit_plots
from .solvers import SOLVERS, SolveRequest, analytical_solve, start_posture
from .solvers.analytical import KNEE_BRANCHES
from .trajectory import AxisBoundary, BoundaryConditions, generate_plan

SOLVE_METHODS = ("analytical",) + tuple(SOLVERS) + ("nn",)


def _six(text: str) -> AxisBoundary:
    try:
        return AxisBoundary(*C._floats(text, 6))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"need six numbers p0,v0,a0,pf,vf,af: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="legik", description="Inverse kinematics of a planar 3-DOF leg.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    w = sub.add_parser("workspace", help="Monte-Carlo workspace samples to CSV")
    w.add_argument("--n", type=int, default=100_000, help="number of samples (default 100000)")
    w.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    w.add_argument("--config", help="model config file (default: built-in model)")
    w.add_argument("--out", default="workspace.csv", help="output CSV path (default workspace.csv)")

    pl = sub.add_parser("plan", help="minimum-jerk task-space plan to CSV")
    pl.add_argument("--config", help="config file with a [trajectory] section")
    pl.add_argument("--x", type=_six, help="x boundary values p0,v0,a0,pf,vf,af (m, m/s, m/s^2)")
    pl.add_argument("--y", type=_six, help="y boundary values p0,v0,a0,pf,vf,af (m, m/s, m/s^2)")
    pl.add_argument("--duration", type=float, help="motion duration in seconds")
    pl.add_argument("--n-samples", type=int, help="number of time samples")
    pl.add_argument("--out", default="plan.csv", help="output CSV path (default plan.csv)")

    s = sub.add_parser("solve", help="solve IK along a plan")
    s.add_argument("--method", required=True, choices=SOLVE_METHODS, help="IK method")
    s.add_argument("--plan", required=True, help="plan CSV written by 'plan'")
    s.add_argument("--config", help="model and solver config file")
    s.add_argument("--out", default="result.csv", help="output CSV path (default result.csv)")
    s.add_argument("--theta0-deg", type=float, help="foot orientation for the analytical method, degrees")
    s.add_argument("--knee-branch", choices=KNEE_BRANCHES, default="positive",
                   help="knee branch for the analytical method (default positive)")
    s.add_argument("--model", help="network file for the nn method")

    t = sub.add_parser("train", help="train the position-to-joint network")
    t.add_argument("--samples", type=int, help="dataset size (default from config: 127282)")
    t.add_argument("--seed", type=int, help="seed for dataset and training (default from config: 0)")
    t.add_argument("--epochs", type=int, help="training epochs (default from config: 500)")
    t.add_argument("--config", help="config file with a [neural] section")
    t.add_argument("--dataset-cache", help="CSV file to read the dataset from, or to write it to if missing")
    t.add_argument("--out", default="model.txt", help="output network file (default model.txt)")

    b = sub.add_parser("bench", help="run and compare all IK methods on the configured trajectory")
    b.add_argument("--config", help="bench config file (default: built-in configuration)")
    b.add_argument("--output-dir", help="output directory (overrides config and LEGIK_OUTPUT_DIR)")
    b.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    b.add_argument("--model", help="pretrained network file for the nn method")
    b.add_argument("--repetitions", type=int, help="timing repetitions per method (default 5)")
    b.add_argument("--parallel", action="store_true", help="run methods in separate processes")

    pt = sub.add_parser("plots", help="SVG plots of a bench run")
    pt.add_argument("--run-dir", required=True, help="bench output directory")
    pt.add_argument("--out", help="plot directory (default RUN_DIR/plots)")
    return p


def cmd_workspace(args) -> int:
    if args.n <= 0:
        raise ValueError("--n must be positive")
    model = C.model_from_config(C.read(args.config))
    csvio.write_workspace(args.out, sample_workspace(model, args.n, args.seed))
    print(f"wrote {args.n} samples to {args.out}")
    return 0


def cmd_plan(args) -> int:
    cp = C.read(args.config)
    bc = C.boundary_from_config(cp)
    duration = bc.duration if args.duration is None else args.duration
    if duration <= 0:
        raise ValueError("--duration must be positive")
    bc = BoundaryConditions(args.x or bc.x, args.y or bc.y, 0.0, duration)
    n = args.n_samples or cp["trajectory"].getint("n_samples")
    csvio.write_plan(args.out, generate_plan(bc, n))
    print(f"wrote {n}-sample plan to {args.out}")
    return 0


def cmd_solve(args) -> int:
    cp = C.read(args.config)
    model = C.model_from_config(cp)
    plan = csvio.read_plan(args.plan)
    method = args.method
    key = None if method in ("analytical", "nn") else method
    opts = C.solver_options_from_config(cp, key)
    limits = C.method_limits_from_config(cp, method)
    lim = model.limits if limits is None else limits
    q0 = start_posture(model, plan.positions[0], lim)
    orient = None
    if method == "analytical":
        if args.theta0_deg is None:
            raise ValueError("the analytical method needs --theta0-deg")
        orient = np.full(len(plan), np.radians(args.theta0_deg))
    request = SolveRequest(model, plan.positions, q0, limits, opts, orient)
    if method == "analytical":
        result = analytical_solve(request, args.knee_branch)
    elif method == "nn":
        if not args.model:
            raise ValueError("the nn method needs --model")
        result = neural.nn_solve(request, neural.load(args.model))
    else:
        result = SOLVERS[method](request)
    csvio.write_result(args.out, plan.sample_times, result)
    print(f"{method}: rmse {result.rmse:.6e} m, {int(result.converged.sum())}/{len(result)} converged, "
          f"wrote {args.out}")
    return 0


def cmd_train(args) -> int:
    cp = C.read(args.config)
    s = cp["neural"]
    seed = s.getint("seed") if args.seed is None else args.seed
    samples = s.getint("samples") if args.samples is None else args.samples
    cfg = replace(C.train_config_from_config(cp), seed=seed)
    if args.epochs is not None:
        cfg = replace(cfg, epochs=args.epochs)
    model = C.model_from_config(cp)
    cache = Path(args.dataset_cache) if args.dataset_cache else None
    if cache is not None and cache.is_file():
        data = csvio.read_dataset(cache)
    else:
        data = neural.generate_dataset(model, samples, seed, C.neural_limits_from_config(cp),
                                       s.get("dataset_filter").strip())
        if cache is not None:
            csvio.write_dataset(cache, data)
    mlp, hist = neural.train(neural.init_mlp(data, seed), data, cfg)
    neural.save(mlp, args.out)
    X, _ = data.part("test")
    if len(X):
        err = np.linalg.norm(fk_points(model, neural.infer_many(mlp, X, model.limits)) - X, axis=1)
        print(f"test position rmse {np.sqrt(np.mean(err ** 2)):.6e} m")
    print(f"best validation mse {hist.best_val_mse[-1]:.6e} at epoch {hist.best_epoch}; wrote {args.out}")
    return 0


def cmd_bench(args) -> int:
    cp = C.read(args.config)
    if args.methods:
        cp["bench"]["methods"] = args.methods
    if args.repetitions is not None:
        cp["bench"]["repetitions"] = str(args.repetitions)
    if args.model:
        cp["neural"]["model_path"] = args.model
    cfg = BenchConfig.from_config(cp)
    cfg.parallel = args.parallel
    if args.output_dir:
        cfg.output_dir = args.output_dir
        os.environ.pop(OUTPUT_ENV, None)
    report = run_bench(cfg)
    print((report.output_dir / "comparison.txt").read_text(), end="")
    print(f"wrote {report.output_dir / 'comparison.csv'}")
    return 0 if all(r.ok for r in report.rows) else 1


def cmd_plots(args) -> int:
    run = Path(args.run_dir)
    if not run.is_dir():
        raise FileNotFoundError(f"run directory not found: {run}")
    files = emit_plots(run, args.out)
    print(f"wrote {len(files)} plot files")
    return 0


COMMANDS = {
    "workspace": cmd_workspace, "plan": cmd_plan, "solve": cmd_solve,
    "train": cmd_train, "bench": cmd_bench, "plots": cmd_plots,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:
        print(f"legik {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
