import time

import numpy as np
import pytest

from legik import neural
from legik.kinematics import KinematicModel
from legik.solvers import SolveRequest, SolverOptions, start_posture
from legik.trajectory import BoundaryConditions, generate_plan


@pytest.fixture(scope="session")
def model():
    return KinematicModel()


@pytest.fixture(scope="session")
def plan():
    return generate_plan(BoundaryConditions.gait_swing(), 101)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def gait_request(model, plan):
    def make(**options):
        q0 = start_posture(model, plan.positions[0])
        return SolveRequest(model, plan.positions, q0, options=SolverOptions(**options))
    return make


@pytest.fixture(scope="session")
def trained_network(model, tmp_path_factory):
    """Full-size network trained once per session (about a minute and a half)."""
    data = neural.generate_dataset(model, neural.DEFAULT_SAMPLES, seed=0,
                                   limits=np.radians(neural.SINGLE_BRANCH_LIMITS_DEG))
    cfg = neural.TrainConfig()
    start = time.perf_counter()
    net, history = neural.train(neural.init_mlp(data, cfg.seed), data, cfg)
    elapsed = time.perf_counter() - start
    path = tmp_path_factory.mktemp("nn") / "model.txt"
    neural.save(net, path)
    return {"mlp": net, "history": history, "data": data, "path": path, "train_time_s": elapsed}


def pytest_runtest_logreport(report):
    label = dict(report.user_properties).get("criterion")
    if label is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA[report.nodeid] = (label, report.outcome)


_CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in _CRITERIA.values():
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {label}")
