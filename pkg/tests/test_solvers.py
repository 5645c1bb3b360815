import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from legik.kinematics import (
    KinematicModel, comfort_centers, fk_points, forward_kinematics, jacobian, joint_positions,
)
from legik.solvers import (
    ESTIMATORS, SOLVERS, BarrierIKSolver, CCDSolver, GAParams, GeneticIKSolver, LMDLSSolver,
    MPPISolver, OutOfReachError, SingularJacobianError, SolveRequest, SolverOptions, analytical_ik,
    analytical_solve, barrier_gradient, barrier_objective, ccd_solve, damping_factors, ik_fixed_ankle,
    lmdls_solve, lmdls_step, mooga_solve, mppi_solve, mppi_step, optimize_ik_solve, pseudo_inverse,
    start_posture,
)
from legik.solvers.ccd import ccd_step
from legik.solvers.genetic import evolve, fitness


@pytest.fixture(scope="module")
def runs(gait_request):
    """One trajectory run per iterative method, shared by the tests below."""
    return {
        "ccd": ccd_solve(gait_request(trace=True)),
        "mppi": mppi_solve(gait_request()),
        "lmdls": lmdls_solve(gait_request()),
        "opt": optimize_ik_solve(gait_request(trace=True)),
        "mooga": mooga_solve(gait_request(trace=True)),
    }


def in_limits(model, Q, strict=False):
    lo, hi = model.lower, model.upper
    if strict:
        return bool(np.all(Q > lo) and np.all(Q < hi))
    return bool(np.all(Q >= lo) and np.all(Q <= hi))


class TestRequest:
    def test_empty_targets_rejected(self, model):
        with pytest.raises(ValueError):
            SolveRequest(model, [], np.zeros(3))

    def test_bad_shapes_rejected(self, model):
        with pytest.raises(ValueError):
            SolveRequest(model, np.zeros((3, 3)), np.zeros(3))
        with pytest.raises(ValueError):
            SolveRequest(model, np.zeros((3, 2)), np.zeros(2))
        with pytest.raises(ValueError):
            SolveRequest(model, np.zeros((3, 2)), np.zeros(3), orientations=[0.0])

    def test_non_finite_target_rejected(self, model):
        with pytest.raises(ValueError):
            SolveRequest(model, [[np.nan, 0.0]], np.zeros(3))

    @pytest.mark.parametrize("kwargs", [
        dict(position_tolerance=0), dict(max_iterations=0), dict(damping_a=0),
        dict(barrier_growth=1.0), dict(barrier_k0=0),
    ])
    def test_invalid_options(self, kwargs):
        with pytest.raises(ValueError):
            SolverOptions(**kwargs)

    @pytest.mark.parametrize("kwargs", [
        dict(crossover_rate=1.5), dict(population=1), dict(elite=100), dict(tournament=0),
        dict(smoothness_weight=-1),
    ])
    def test_invalid_ga_params(self, kwargs):
        with pytest.raises(ValueError):
            GAParams(**kwargs)

    def test_limits_override(self, model):
        lim = np.radians([[0, 10], [0, 10], [60, 70]])
        r = SolveRequest(model, [[0.5, 0.5]], np.zeros(3), joint_limits=lim)
        np.testing.assert_array_equal(r.limits, lim)


class TestStartPosture:
    def test_reaches_first_target_inside_limits(self, model, plan):
        q = start_posture(model, plan.positions[0])
        np.testing.assert_allclose(fk_points(model, q)[0], plan.positions[0], atol=1e-12)
        assert in_limits(model, q, strict=True)
        assert q[2] == pytest.approx(comfort_centers(model)[2])

    def test_unreachable_falls_back_to_comfort_centres(self, model):
        q = start_posture(model, (5.0, 0.0))
        np.testing.assert_allclose(q, comfort_centers(model))


class TestAnalytical:
    @settings(max_examples=200, deadline=None)
    @given(st.tuples(*[st.floats(0, 1) for _ in range(3)]))
    def test_round_trip(self, rho):
        m = KinematicModel()
        q = m.lower + np.array(rho) * (m.upper - m.lower)
        q[1] = max(q[1], 1e-3)  # the straight knee is a branch point
        pose = forward_kinematics(m, q)
        np.testing.assert_allclose(analytical_ik(m, pose, "positive"), q, atol=1e-9)

    def test_other_branch_reaches_the_same_pose(self, model):
        q = np.radians([30, 60, 90])
        pose = forward_kinematics(model, q)
        q2 = analytical_ik(model, pose, "negative")
        assert q2[1] < 0
        np.testing.assert_allclose(forward_kinematics(model, q2), pose, atol=1e-12)

    def test_out_of_reach(self, model):
        with pytest.raises(OutOfReachError) as info:
            analytical_ik(model, (2.0, 0.0, 0.0))
        assert info.value.distance > info.value.outer

    def test_needs_orientation_and_valid_branch(self, model):
        with pytest.raises(ValueError):
            analytical_ik(model, (0.5, 0.3))
        with pytest.raises(ValueError):
            analytical_ik(model, (0.5, 0.3, 0.1), "sideways")

    def test_fixed_ankle(self, model, rng):
        for _ in range(50):
            q = model.lower + rng.random(3) * (model.upper - model.lower)
            q[1] = max(q[1], 0.05)
            got = ik_fixed_ankle(model, fk_points(model, q)[0], q[2])
            np.testing.assert_allclose(fk_points(model, got)[0], fk_points(model, q)[0], atol=1e-12)
            assert got[2] == q[2]

    def test_solve_reports_unreachable_targets(self, model):
        req = SolveRequest(model, [[0.6, 0.3], [3.0, 0.0]], np.zeros(3), orientations=[0.3, 0.3])
        res = analytical_solve(req)
        assert res.converged.tolist() == [True, False]
        with pytest.raises(ValueError):
            analytical_solve(SolveRequest(model, [[0.6, 0.3]], np.zeros(3)))


class TestCCD:
    def test_no_update_increases_the_distance(self, runs):
        steps = [s for per_target in runs["ccd"].trace for s in per_target]
        assert steps
        worst = max(after - before for _, before, after in steps)
        assert worst <= 1e-12

    def test_accuracy_bound_and_limits(self, runs, model):
        assert runs["ccd"].rmse < 0.2
        assert in_limits(model, runs["ccd"].joint_trajectory)

    def test_distal_to_proximal_order(self, runs):
        joints = [j for j, _, _ in runs["ccd"].trace[1][:3]]
        assert joints == [3, 2, 1]

    def test_target_already_reached_needs_no_sweep(self, model):
        q = np.radians([20, 40, 90])
        res = ccd_solve(SolveRequest(model, fk_points(model, q), q))
        assert res.iterations[0] == 0 and res.converged[0]

    def test_step_respects_limits(self, model, rng):
        for _ in range(100):
            q = model.lower + rng.random(3) * (model.upper - model.lower)
            target = rng.uniform(-0.9, 0.9, 2)
            assert in_limits(model, ccd_step(model, q, target, model.limits))

    def test_reachable_point_converges(self, model):
        goal = np.radians([40, 50, 80])
        q0 = np.radians([30, 40, 90])
        res = ccd_solve(SolveRequest(model, fk_points(model, goal), q0, options=SolverOptions(max_iterations=2000)))
        assert res.position_errors[0] < 1e-4


class TestMPPI:
    def test_tracks_the_trajectory(self, runs):
        r = runs["mppi"]
        assert r.converged.all() and r.position_errors.max() < 1e-5
        assert not r.info["singular"].any()

    def test_pseudo_inverse_is_right_inverse(self, model, rng):
        J = jacobian(model, rng.uniform(0.2, 1.2, 3))
        np.testing.assert_allclose(J @ pseudo_inverse(J), np.eye(2), atol=1e-12)

    def test_singular_configuration(self, model):
        with pytest.raises(SingularJacobianError):
            pseudo_inverse(jacobian(model, (0.3, 0.0, 0.0)))
        with pytest.raises(SingularJacobianError):
            mppi_step(model, (0.3, 0.0, 0.0), (0.5, 0.5))

    def test_singular_start_is_reported(self, model):
        res = mppi_solve(SolveRequest(model, [[0.5, 0.5]], np.zeros(3)))
        assert res.info["singular"][0] and not res.converged[0]


class TestLMDLS:
    def test_tracks_inside_limits(self, runs, model):
        r = runs["lmdls"]
        assert r.converged.all() and r.position_errors.max() < 1e-5
        assert in_limits(model, r.joint_trajectory)

    def test_vanishing_damping_is_pseudo_inverse_step(self, model, rng):
        for _ in range(20):
            q = rng.uniform(0.2, 1.4, 3)
            target = fk_points(model, q + rng.normal(0, 0.05, 3))[0]
            np.testing.assert_allclose(lmdls_step(model, q, target, np.zeros(3)), mppi_step(model, q, target),
                                       atol=1e-8)
            np.testing.assert_allclose(lmdls_step(model, q, target, np.full(3, 1e-14)),
                                       mppi_step(model, q, target), atol=1e-8)
            # unequal vanishing damping picks a weighted minimum-norm step,
            # which still solves the linearised task exactly
            step = lmdls_step(model, q, target, [1e-10, 2e-10, 3e-10]) - q
            np.testing.assert_allclose(jacobian(model, q) @ step, target - fk_points(model, q)[0], atol=1e-8)

    def test_isotropic_and_joint_space_forms_agree(self, model):
        q = np.array([0.4, 0.9, 1.3])
        target = np.array([0.6, 0.4])
        lam = 0.01
        J = jacobian(model, q)
        e = target - fk_points(model, q)[0]
        joint_space = q + np.linalg.solve(J.T @ J + lam * np.eye(3), J.T @ e)
        np.testing.assert_allclose(lmdls_step(model, q, target, np.full(3, lam)), joint_space, atol=1e-12)

    def test_damping_profile(self, model):
        c = comfort_centers(model)
        lim = model.limits
        np.testing.assert_array_equal(damping_factors(c, c, lim, 0.1, 2, 1e-9), np.full(3, 1e-9))
        # at a limit of a joint whose centre is the range midpoint the ratio is 1
        mid = lim.mean(axis=1)
        q = mid.copy()
        q[1] = lim[1, 1]
        assert damping_factors(q, mid, lim, 0.1, 2)[1] == pytest.approx(0.1)
        below = mid - 0.2
        assert np.all(damping_factors(below, mid, lim, 0.1, 3, 1e-9) == 1e-9)
        assert np.all(damping_factors(below, mid, lim, 0.1, 2.5) > 0)

    def test_pinned_joint_gets_floor(self):
        lim = np.array([[0.0, 1.0], [0.5, 0.5], [0.0, 1.0]])
        lam = damping_factors([0.9, 0.5, 0.1], np.array([0.5, 0.5, 0.5]), lim, 0.1, 2, 1e-6)
        assert lam[1] == 1e-6


class TestBarrierOptimisation:
    def test_accuracy_and_strict_feasibility(self, runs, model):
        r = runs["opt"]
        assert r.rmse < 1e-4
        assert in_limits(model, r.joint_trajectory, strict=True)

    def test_outer_errors_shrink(self, runs):
        for errors in runs["opt"].trace:
            assert errors[-1] <= errors[0] + 1e-12

    def test_objective_infinite_outside_and_needs_positive_k(self, model):
        q = np.array([model.upper[0], 0.5, 1.5])
        assert barrier_objective(model, q, (0.5, 0.5), 1.0) == np.inf
        with pytest.raises(ValueError):
            barrier_objective(model, np.array([0.5, 0.5, 1.5]), (0.5, 0.5), 0.0)

    def test_gradient_matches_finite_differences(self, model, rng):
        for _ in range(10):
            q = model.lower + (0.2 + 0.6 * rng.random(3)) * (model.upper - model.lower)
            target = rng.uniform(0.3, 0.7, 2)
            g = barrier_gradient(model, q, target, 10.0)
            h = 1e-6
            num = np.array([
                (barrier_objective(model, q + h * e, target, 10.0) - barrier_objective(model, q - h * e, target, 10.0))
                / (2 * h) for e in np.eye(3)
            ])
            np.testing.assert_allclose(g, num, rtol=1e-5, atol=1e-5)

    def test_start_must_be_interior(self, model):
        with pytest.raises(ValueError):
            optimize_ik_solve(SolveRequest(model, [[0.5, 0.5]], np.array([model.upper[0], 0.5, 1.5])))


class TestGenetic:
    def test_accuracy(self, runs):
        assert runs["mooga"].rmse < 1e-3

    def test_best_fitness_never_increases(self, runs):
        for history in runs["mooga"].trace:
            assert np.all(np.diff(history) <= 0)

    def test_solutions_are_continuous(self, runs):
        steps = np.abs(np.diff(runs["mooga"].joint_trajectory, axis=0))
        assert steps.max() < 0.2

    def test_seed_determinism(self, model, plan):
        req = SolveRequest(model, plan.positions[:5], start_posture(model, plan.positions[0]),
                           options=SolverOptions(seed=3))
        a, b = mooga_solve(req), mooga_solve(req)
        np.testing.assert_array_equal(a.joint_trajectory, b.joint_trajectory)

    def test_fitness_infinite_at_limits(self, model):
        pop = np.array([[model.upper[0], 0.5, 1.5], [0.5, 0.5, 1.5]])
        f = fitness(model, pop, (0.5, 0.5), model.limits)
        assert f[0] == np.inf and np.isfinite(f[1])

    def test_population_stays_in_limits(self, model, rng):
        params = GAParams(population=20, generations=5)
        best, gens, hist = evolve(model, np.array([0.6, 0.3]), model.limits, params, rng)
        assert in_limits(model, best) and gens == 5 and len(hist) == 6


class TestEstimators:
    @pytest.mark.parametrize("name", sorted(ESTIMATORS))
    def test_clone_and_params(self, name):
        est = ESTIMATORS[name]()
        assert clone(est).get_params() == est.get_params()

    def test_registry_order(self):
        assert list(SOLVERS) == ["ccd", "mppi", "lmdls", "opt", "mooga"]

    @pytest.mark.parametrize("cls", [CCDSolver, MPPISolver, LMDLSSolver, BarrierIKSolver])
    def test_fit_predict(self, cls, model, plan):
        X = plan.positions[:10]
        est = cls(model=model).fit()
        Q = est.predict(X)
        assert Q.shape == (10, 3)
        assert est.score(X) <= 0

    def test_predict_before_fit(self, plan):
        from sklearn.exceptions import NotFittedError
        with pytest.raises(NotFittedError):
            LMDLSSolver().predict(plan.positions)

    def test_genetic_estimator(self, model, plan):
        est = GeneticIKSolver(model=model, generations=40, seed=1).fit()
        assert est.predict(plan.positions[:3]).shape == (3, 3)
