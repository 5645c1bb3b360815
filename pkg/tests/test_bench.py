import csv
import logging
import math
import re

import numpy as np
import pytest

from legik import config as C
from legik import csvio, neural
from legik.bench import METHODS, BenchConfig, NeuralSettings, load_metrics, read_comparison, run_bench
from legik.cli import build_parser, main
from legik.kinematics import KinematicModel, sample_workspace
from legik.metrics import rmse
from legik.plots import emit_plots, line_plot_svg
from legik.solvers import SolverOptions


@pytest.fixture(scope="module")
def small_model_file(tmp_path_factory):
    m = KinematicModel()
    data = neural.generate_dataset(m, 3000, seed=0, limits=np.radians(neural.SINGLE_BRANCH_LIMITS_DEG))
    net, _ = neural.train(neural.init_mlp(data), data, neural.TrainConfig(epochs=20))
    path = tmp_path_factory.mktemp("net") / "model.txt"
    neural.save(net, path)
    return path


def quick_config(out, model_file, **kw):
    kw.setdefault("repetitions", 1)
    kw.setdefault("methods", ("mppi", "lmdls", "nn"))
    return BenchConfig(output_dir=str(out), neural=NeuralSettings(model_path=str(model_file), train=False), **kw)


@pytest.fixture(scope="module")
def quick_run(tmp_path_factory, small_model_file):
    out = tmp_path_factory.mktemp("bench")
    return run_bench(quick_config(out, small_model_file))


class TestBench:
    def test_comparison_schema(self, quick_run):
        with open(quick_run.output_dir / "comparison.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["method", "time_s", "rmse_m", "comfort_index"]
        assert [r[0] for r in rows[1:]] == ["mppi", "lmdls", "nn"]

    def test_artifacts_written(self, quick_run):
        out = quick_run.output_dir
        for name in ("plan.csv", "comparison.txt", "metadata.json"):
            assert (out / name).is_file()
        for m in ("mppi", "lmdls", "nn"):
            for name in ("joints.csv", "errors.csv", "metrics.json"):
                assert (out / m / name).is_file()

    def test_rmse_matches_emitted_joint_files(self, quick_run):
        plan = csvio.read_plan(quick_run.output_dir / "plan.csv")
        for row in read_comparison(quick_run.output_dir / "comparison.csv"):
            joints = csvio.read_result(quick_run.output_dir / row.method / "joints.csv")["joints"]
            assert abs(rmse(joints, plan.positions, KinematicModel()) - row.rmse_m) < 1e-12

    def test_metrics_json(self, quick_run):
        r = load_metrics(quick_run.output_dir / "lmdls" / "metrics.json")
        assert r.rmse == quick_run.metrics["lmdls"].rmse
        assert r.xi == r.mu == r.beta == 1.0

    def test_single_method(self, tmp_path, small_model_file):
        report = run_bench(quick_config(tmp_path, small_model_file, methods=("mppi",)))
        assert [r.method for r in report.rows] == ["mppi"]

    def test_rows_follow_fixed_order(self, tmp_path, small_model_file):
        report = run_bench(quick_config(tmp_path, small_model_file, methods=("nn", "mppi")))
        assert [r.method for r in report.rows] == ["mppi", "nn"]

    def test_failing_method_becomes_failed_row(self, tmp_path, small_model_file):
        # a pinned joint puts the start on the limit, which the barrier method refuses
        pinned = np.radians([[-20, 120], [0, 118], [90, 90]])
        cfg = quick_config(tmp_path, small_model_file, methods=("mppi", "opt", "lmdls"),
                           method_limits={"opt": pinned})
        report = run_bench(cfg)
        status = {r.method: r.ok for r in report.rows}
        assert status == {"mppi": True, "lmdls": True, "opt": False}
        assert [r.method for r in report.rows] == ["mppi", "lmdls", "opt"]
        assert "opt" in report.metadata["failures"]
        row = read_comparison(tmp_path / "comparison.csv")[2]
        assert row.method == "opt" and math.isnan(row.rmse_m)

    def test_missing_network_is_reported(self, tmp_path):
        cfg = BenchConfig(output_dir=str(tmp_path), methods=("mppi", "nn"), repetitions=1,
                          neural=NeuralSettings(model_path=str(tmp_path / "absent.txt"), train=False))
        report = run_bench(cfg)
        assert [r.ok for r in report.rows] == [True, False]

    def test_environment_overrides_output_dir(self, tmp_path, small_model_file, monkeypatch):
        target = tmp_path / "from_env"
        monkeypatch.setenv("LEGIK_OUTPUT_DIR", str(target))
        report = run_bench(quick_config(tmp_path / "from_config", small_model_file, methods=("mppi",)))
        assert report.output_dir == target and (target / "comparison.csv").is_file()
        assert not (tmp_path / "from_config").exists()

    def test_never_writes_outside_output_dir(self, tmp_path, small_model_file):
        out = tmp_path / "out"
        run_bench(quick_config(out, small_model_file))
        assert [p.name for p in tmp_path.iterdir()] == ["out"]

    def test_parallel_matches_serial(self, tmp_path, small_model_file, quick_run):
        report = run_bench(quick_config(tmp_path, small_model_file, parallel=True))
        for a, b in zip(report.rows, quick_run.rows):
            assert (a.method, a.rmse_m, a.comfort_index) == (b.method, b.rmse_m, b.comfort_index)

    def test_train_on_demand(self, tmp_path):
        nn = NeuralSettings(train=True, samples=1000, train_config=neural.TrainConfig(epochs=2))
        report = run_bench(BenchConfig(output_dir=str(tmp_path), methods=("nn",), repetitions=1, neural=nn))
        assert report.rows[0].ok and "train_time_s" in report.metadata
        assert (tmp_path / "nn" / "model.txt").is_file()

    @pytest.mark.parametrize("kwargs", [dict(methods=("bogus",)), dict(methods=()), dict(repetitions=0),
                                        dict(n_samples=3)])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValueError):
            BenchConfig(**kwargs)

    def test_default_methods(self):
        assert BenchConfig().methods == METHODS == ("ccd", "mppi", "lmdls", "opt", "mooga", "nn")


class TestConfig:
    def test_defaults_round_trip(self):
        cfg = BenchConfig.from_config(C.read())
        assert cfg.model == KinematicModel()
        assert cfg.options == SolverOptions()
        assert cfg.methods == METHODS and cfg.repetitions == 5
        np.testing.assert_allclose(cfg.neural.limits, np.radians(neural.SINGLE_BRANCH_LIMITS_DEG))

    def test_overrides(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "[model]\nL2 = 0.40\ntheta1_limits_deg = -10, 100\n"
            "[solver]\nmax_iterations = 50\n"
            "[solver.lmdls]\ndamping_b = 4\ntheta3_limits_deg = 60, 120\n"
            "[ga]\nmutation_sigma_deg = 1\n"
            "[comfort]\nbeta = 0\n"
        )
        cp = C.read(path)
        m = C.model_from_config(cp)
        assert m.L2 == 0.40 and np.degrees(m.limits[0]) == pytest.approx([-10, 100])
        assert C.solver_options_from_config(cp).max_iterations == 50
        lm = C.solver_options_from_config(cp, "lmdls")
        assert lm.damping_b == 4.0 and lm.max_iterations == 50
        assert lm.ga.mutation_sigma == pytest.approx(np.radians(1))
        lim = C.method_limits_from_config(cp, "lmdls")
        assert np.degrees(lim[2]) == pytest.approx([60, 120])
        assert np.degrees(lim[0]) == pytest.approx([-10, 100])
        assert C.weights_from_config(cp).beta == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            C.read(tmp_path / "nope.cfg")

    def test_bad_values(self):
        with pytest.raises(ValueError):
            C.model_from_config(C.read(text="[model]\nhome_deg = 1, 2\n"))
        with pytest.raises(ValueError):
            C.boundary_from_config(C.read(text="[trajectory]\nduration_s = 0\n"))


class TestCSV:
    def test_workspace_round_trip(self, tmp_path, model):
        s = sample_workspace(model, 50, seed=3)
        csvio.write_workspace(tmp_path / "w.csv", s)
        back = csvio.read_workspace(tmp_path / "w.csv")
        np.testing.assert_allclose(back.joints, s.joints, rtol=1e-15)
        np.testing.assert_array_equal(back.points, s.points)

    def test_plan_round_trip(self, tmp_path, plan):
        csvio.write_plan(tmp_path / "p.csv", plan)
        back = csvio.read_plan(tmp_path / "p.csv")
        np.testing.assert_array_equal(back.samples, plan.samples)
        np.testing.assert_array_equal(back.sample_times, plan.sample_times)

    def test_header_checked(self, tmp_path):
        (tmp_path / "p.csv").write_text("t,x,y\n0,1,2\n")
        with pytest.raises(ValueError):
            csvio.read_plan(tmp_path / "p.csv")

    def test_dataset_round_trip(self, tmp_path, model):
        d = neural.generate_dataset(model, 200, seed=2)
        csvio.write_dataset(tmp_path / "d.csv", d)
        back = csvio.read_dataset(tmp_path / "d.csv")
        for part in ("train", "validation", "test"):
            np.testing.assert_array_equal(back.part(part)[0], d.part(part)[0])
            np.testing.assert_array_equal(back.part(part)[1], d.part(part)[1])


class TestPlots:
    def test_two_files_per_method(self, quick_run, tmp_path):
        files = emit_plots(quick_run.output_dir, tmp_path / "plots")
        assert len(files) == 6
        assert {f.name for f in files} == {f"{m}_{k}.svg" for m in ("mppi", "lmdls", "nn")
                                           for k in ("joints", "error")}

    def test_x_axis_spans_duration(self):
        t = np.linspace(0, 0.5, 11)
        svg = line_plot_svg(t, {"a": t ** 2}, "title", "time [s]", "y", xlim=(0, 0.5))
        labels = re.findall(r'text-anchor="middle">([^<]+)</text>', svg)
        assert "0" in labels and "0.5" in labels
        pts = re.search(r'points="([^"]+)"', svg).group(1).split()
        xs = [float(p.split(",")[0]) for p in pts]
        assert xs[0] == 80.0 and xs[-1] == 620.0

    def test_empty_series_skipped_with_warning(self, tmp_path, caplog):
        run = tmp_path / "run"
        (run / "m").mkdir(parents=True)
        csvio.write_rows(run / "m" / "errors.csv", csvio.ERROR_HEADER, [])
        with caplog.at_level(logging.WARNING):
            files = emit_plots(run)
        assert files == [] and "skipped" in caplog.text


class TestCLI:
    def test_help_documents_every_flag(self, capsys):
        parser = build_parser()
        for name in ("workspace", "plan", "solve", "train", "bench", "plots"):
            with pytest.raises(SystemExit) as info:
                parser.parse_args([name, "--help"])
            assert info.value.code == 0
            text = capsys.readouterr().out
            sub = parser._subparsers._group_actions[0].choices[name]
            for action in sub._actions:
                for flag in action.option_strings:
                    assert flag in text

    def test_unknown_flag_and_bad_method_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["bench", "--nope"])
        assert info.value.code == 2
        with pytest.raises(SystemExit) as info:
            main(["solve", "--method", "bogus", "--plan", str(tmp_path / "p.csv")])
        assert info.value.code == 2

    def test_workspace_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["workspace", "--n", "2000", "--seed", "7", "--out", str(a)]) == 0
        assert main(["workspace", "--n", "2000", "--seed", "7", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().splitlines()[0] == "theta1_deg,theta2_deg,theta3_deg,x_m,y_m"

    def test_plan_and_solve(self, tmp_path):
        plan, out = tmp_path / "plan.csv", tmp_path / "r.csv"
        assert main(["plan", "--n-samples", "21", "--out", str(plan)]) == 0
        assert plan.read_text().splitlines()[0] == "t_s,x_m,y_m,vx,vy,ax,ay"
        assert main(["solve", "--method", "lmdls", "--plan", str(plan), "--out", str(out)]) == 0
        res = csvio.read_result(out)
        assert res["converged"].all() and len(res["t_s"]) == 21

    def test_inline_boundaries(self, tmp_path):
        plan = tmp_path / "plan.csv"
        assert main(["plan", "--x", "0.8,0,0,0.7,0,0", "--y", "0,0,0,0.4,0,0", "--duration", "1",
                     "--out", str(plan)]) == 0
        p = csvio.read_plan(plan)
        assert p.samples[-1, 0] == pytest.approx(0.7) and p.duration == pytest.approx(1.0)

    def test_analytical_needs_orientation(self, tmp_path, capsys):
        plan = tmp_path / "plan.csv"
        main(["plan", "--out", str(plan)])
        code = main(["solve", "--method", "analytical", "--plan", str(plan), "--out", str(tmp_path / "a.csv")])
        err = capsys.readouterr().err.strip()
        assert code == 1 and len(err.splitlines()) == 1 and "theta0" in err
        assert main(["solve", "--method", "analytical", "--theta0-deg", "20", "--knee-branch", "positive",
                     "--plan", str(plan), "--out", str(tmp_path / "a.csv")]) == 0

    def test_nn_solve_and_train(self, tmp_path, small_model_file):
        plan = tmp_path / "plan.csv"
        main(["plan", "--out", str(plan)])
        assert main(["solve", "--method", "nn", "--model", str(small_model_file), "--plan", str(plan),
                     "--out", str(tmp_path / "nn.csv")]) == 0
        model, cache = tmp_path / "m.txt", tmp_path / "d.csv"
        assert main(["train", "--samples", "1500", "--seed", "2", "--epochs", "2", "--dataset-cache", str(cache),
                     "--out", str(model)]) == 0
        first = model.read_text()
        assert main(["train", "--samples", "1500", "--seed", "2", "--epochs", "2", "--dataset-cache", str(cache),
                     "--out", str(model)]) == 0
        assert model.read_text() == first

    def test_bench_and_plots(self, tmp_path, small_model_file, capsys):
        out = tmp_path / "run"
        code = main(["bench", "--methods", "mppi,nn", "--model", str(small_model_file), "--repetitions", "1",
                     "--output-dir", str(out)])
        assert code == 0 and (out / "comparison.csv").is_file()
        assert "comparison.csv" in capsys.readouterr().out
        assert main(["plots", "--run-dir", str(out)]) == 0
        assert len(list((out / "plots").glob("*.svg"))) == 4

    def test_missing_run_dir(self, tmp_path):
        assert main(["plots", "--run-dir", str(tmp_path / "none")]) == 1
