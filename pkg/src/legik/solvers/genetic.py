"""Real-coded genetic algorithm for IK."""
from __future__ import annotations

import numpy as np

from ..kinematics import fk_points, joints_from_unit, limit_barrier_rows
from .base import GAParams, IKSolver, SolveRequest, SolveResult, SolverOptions, Stopwatch


def position_error(model, population, target) -> np.ndarray:
    return np.linalg.norm(fk_points(model, population) - np.asarray(target)[:2], axis=1)


def fitness(model, population, target, limits, reference=None, smoothness=0.0) -> np.ndarray:
    """Position error plus ``smoothness * max|q - reference|``.

    Individuals on or outside a joint limit (infinite log barrier) get
    ``inf``.  Position error is a norm, not a square, so for ``smoothness``
    below the smallest singular value of the Jacobian the minimum still has
    zero position error; the second objective only picks, among exact
    solutions, the one closest to ``reference``.
    """
    fit = position_error(model, population, target)
    if reference is not None and smoothness > 0:
        fit = fit + smoothness * np.max(np.abs(population - reference), axis=1)
    fit[~np.isfinite(limit_barrier_rows(population, limits))] = np.inf
    return fit


def _tournament(rng, fit, n, size):
    entrants = rng.integers(0, len(fit), size=(n, size))
    return entrants[np.arange(n), np.argmin(fit[entrants], axis=1)]


def evolve(model, target, limits, params: GAParams, rng, seeds=(), tolerance=0.0, reference=None):
    """Run the GA for one target.

    ``seeds`` are joint vectors injected into the initial population
    (after clamping); ``reference`` is the posture the smoothness objective
    measures from.  Stops early once the fittest individual's position
    error is below ``tolerance``.  Returns
    ``(best, generations_run, best_fitness_history)``.
    """
    P = params.population
    pop = joints_from_unit(model, rng.random((P, 3)), limits)
    for i, s in enumerate(seeds):
        pop[i] = np.clip(s, limits[:, 0], limits[:, 1])

    def score(population):
        return fitness(model, population, target, limits, reference, params.smoothness_weight)

    def best_error():
        best = pop[int(np.argmin(fit))][None, :]
        return float(position_error(model, best, target)[0])

    fit = score(pop)
    history = [float(fit.min())]
    n_child = P - params.elite
    gen = 0
    for gen in range(1, params.generations + 1):
        if best_error() < tolerance:
            gen -= 1
            break
        order = np.argsort(fit, kind="stable")
        elites = pop[order[: params.elite]]

        a = pop[_tournament(rng, fit, n_child, params.tournament)]
        b = pop[_tournament(rng, fit, n_child, params.tournament)]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        spread = params.blend_alpha * (hi - lo)
        blend = (lo - spread) + rng.random((n_child, 3)) * (hi - lo + 2 * spread)
        cross = rng.random(n_child) < params.crossover_rate
        children = np.where(cross[:, None], blend, a)

        mutate = rng.random((n_child, 3)) < params.mutation_rate
        children = children + mutate * rng.normal(0.0, params.mutation_sigma, (n_child, 3))
        children = np.clip(children, limits[:, 0], limits[:, 1])

        pop = np.vstack([elites, children])
        fit = score(pop)
        history.append(float(fit.min()))
    return pop[int(np.argmin(fit))].copy(), gen, history


def mooga_solve(request: SolveRequest) -> SolveResult:
    """GA tracking; the previous target's best individual seeds the next population."""
    model, opts = request.model, request.options
    limits = request.limits
    rng = np.random.default_rng(opts.seed)
    n = len(request)
    joints = np.empty((n, 3))
    iters = np.zeros(n, dtype=int)
    traces = [] if opts.trace else None
    prev = request.initial_q
    with Stopwatch() as sw:
        for i, target in enumerate(request.targets):
            best, gens, history = evolve(model, target, limits, opts.ga, rng, (prev,), opts.position_tolerance,
                                           reference=prev)
            joints[i] = prev = best
            iters[i] = gens
            if traces is not None:
                traces.append(history)
    result = SolveResult.from_joints("mooga", model, request.targets, joints, iters,
                                     np.zeros(n, dtype=bool), sw.elapsed, traces)
    result.converged = result.position_errors < opts.position_tolerance
    return result


class GeneticIKSolver(IKSolver):
    method = "mooga"

    def __init__(self, model=None, initial_q=None, joint_limits=None, position_tolerance=1e-6,
                 population=100, generations=150, crossover_rate=0.8, mutation_rate=0.1,
                 mutation_sigma=float(np.radians(2.0)), elite=2, tournament=3, blend_alpha=0.5,
                 smoothness_weight=0.05, seed=0, trace=False):
        self.model = model
        self.initial_q = initial_q
        self.joint_limits = joint_limits
        self.position_tolerance = position_tolerance
        self.population = population
        self.generations = generations
        self.crossover_rate = crossover_rate
        self.mutation_rate = mutation_rate
        self.mutation_sigma = mutation_sigma
        self.elite = elite
        self.tournament = tournament
        self.blend_alpha = blend_alpha
        self.smoothness_weight = smoothness_weight
        self.seed = seed
        self.trace = trace

    def _options(self):
        ga = GAParams(
            population=self.population, generations=self.generations,
            crossover_rate=self.crossover_rate, mutation_rate=self.mutation_rate,
            mutation_sigma=self.mutation_sigma, elite=self.elite, tournament=self.tournament,
            blend_alpha=self.blend_alpha, smoothness_weight=self.smoothness_weight,
        )
        return SolverOptions(position_tolerance=self.position_tolerance, ga=ga, seed=self.seed, trace=self.trace)

    def _solve(self, request):
        return mooga_solve(request)
