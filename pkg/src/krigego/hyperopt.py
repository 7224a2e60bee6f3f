"""Likelihood maximization over the correlation hyperparameters.

Search runs in log10(theta) space on [-3, 3]^m. The global stage is a
real-coded elitist GA (tournament selection, blend crossover, Gaussian
mutation); the local stage is a bound-constrained quasi-Newton ascent with
central finite-difference gradients. Composite strategies: exhaustive
(GA+BFGS for every fit), simplified (GA only for the first fit of a scan,
warm-started BFGS afterwards, GA+BFGS re-polish of the final trend), and
one-shot BFGS from a random start.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .kriging import (
    LOG_THETA_BOUNDS,
    Hyperparameters,
    _cll_batch,
    _cll_from_parts,
)
from .polybasis import eval_basis

__all__ = [
    "TuneKind",
    "TuneStrategy",
    "TuneState",
    "ga_maximize",
    "bfgs_maximize",
    "tune_exhaustive",
    "tune_simplified",
    "tune_bfgs_only",
    "tune_for_stage",
]


class TuneKind(Enum):
    EXHAUSTIVE_GA_BFGS = "exhaustive"
    SIMPLIFIED_GA_BFGS = "simplified"
    BFGS_ONLY = "bfgs"


@dataclass
class TuneStrategy:
    kind: TuneKind = TuneKind.SIMPLIFIED_GA_BFGS
    ga_population: int = 100
    ga_generations: int = 200
    rng_seed: int = 0
    # Stop the GA early once the elite has not improved for this many
    # generations (still capped by ga_generations).
    ga_stall_generations: int | None = 30

    def __post_init__(self):
        self.kind = TuneKind(self.kind)
        if self.ga_population < 4:
            raise ValueError("GA population must be >= 4")
        if self.ga_generations < 1:
            raise ValueError("GA generations must be >= 1")


@dataclass
class TuneState:
    """Warm-start bookkeeping, confined to a single surrogate scan/run.

    Keeps every previous iteration's optimum; a warm-started search begins
    from whichever of them scores best on the current objective.
    """

    last_optimum_log_theta: np.ndarray | None = None
    iteration_counter: int = 0
    previous_optima_log_theta: list = field(default_factory=list)

    def remember(self, log_theta):
        arr = np.asarray(log_theta, dtype=float)
        self.last_optimum_log_theta = arr
        self.previous_optima_log_theta.append(arr.copy())
        self.iteration_counter += 1

    def reset_scan(self, anchor=None):
        """Re-anchor the chain for a fresh scan; previously found optima
        stay eligible as warm-start candidates."""
        if anchor is None:
            self.last_optimum_log_theta = None
            self.previous_optima_log_theta = []
        else:
            arr = np.asarray(anchor, dtype=float)
            self.last_optimum_log_theta = arr
            if not any(np.array_equal(arr, p) for p in self.previous_optima_log_theta):
                self.previous_optima_log_theta.append(arr.copy())


def ga_maximize(
    objective,
    lower,
    upper,
    *,
    population=100,
    generations=200,
    seed=0,
    stall_generations=None,
    seed_points=None,
    vectorized=False,
):
    """Elitist real-coded GA; returns (best_x, best_value).

    Deterministic given the seed. Tournament selection of size 2, blend
    crossover (BLX-0.5), per-gene Gaussian mutation with sigma 0.1 and
    rate 1/m, one elite carried over unchanged.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    m = lower.size
    if population < 4:
        raise ValueError("GA population must be >= 4")
    if generations < 1:
        raise ValueError("GA generations must be >= 1")
    rng = np.random.default_rng(seed)

    def evaluate(P):
        if vectorized:
            return np.asarray(objective(P), dtype=float)
        return np.array([float(objective(x)) for x in P])

    pop = rng.uniform(lower, upper, size=(population, m))
    if seed_points is not None:
        pts = np.atleast_2d(np.asarray(seed_points, dtype=float))
        k = min(len(pts), population)
        pop[:k] = np.clip(pts[:k], lower, upper)
    fitness = evaluate(pop)

    best_i = int(np.argmax(fitness))
    best_x, best_f = pop[best_i].copy(), float(fitness[best_i])
    since_improvement = 0

    n_child = population - 1
    for _ in range(generations):
        # tournament selection (size 2) for both parents of every child
        idx = rng.integers(0, population, size=(n_child, 4))
        w1 = np.where(fitness[idx[:, 0]] >= fitness[idx[:, 1]], idx[:, 0], idx[:, 1])
        w2 = np.where(fitness[idx[:, 2]] >= fitness[idx[:, 3]], idx[:, 2], idx[:, 3])
        u = rng.uniform(-0.5, 1.5, size=(n_child, m))  # BLX-0.5 blend
        children = u * pop[w1] + (1.0 - u) * pop[w2]
        mask = rng.random((n_child, m)) < (1.0 / m)
        children = children + mask * rng.normal(0.0, 0.1, size=(n_child, m))
        pop = np.vstack([best_x[None, :], np.clip(children, lower, upper)])  # elitism
        fitness = evaluate(pop)
        gen_i = int(np.argmax(fitness))
        if fitness[gen_i] > best_f:
            best_x, best_f = pop[gen_i].copy(), float(fitness[gen_i])
            since_improvement = 0
        else:
            since_improvement += 1
        if stall_generations is not None and since_improvement >= stall_generations:
            break
    return best_x, best_f


def _fd_gradient(objective, x, fx, lower, upper, h, objective_batch=None):
    m = x.size
    XP = np.tile(x, (m, 1))
    XM = np.tile(x, (m, 1))
    for j in range(m):
        XP[j, j] = min(x[j] + h, upper[j])
        XM[j, j] = max(x[j] - h, lower[j])
    if objective_batch is not None:
        vals = np.asarray(objective_batch(np.vstack([XP, XM])), dtype=float)
        fps, fms = vals[:m], vals[m:]
    else:
        fps = np.array([float(objective(XP[j])) if XP[j, j] > x[j] else fx for j in range(m)])
        fms = np.array([float(objective(XM[j])) if XM[j, j] < x[j] else fx for j in range(m)])
    g = np.zeros(m)
    for j in range(m):
        fp = fps[j] if XP[j, j] > x[j] else fx
        fm = fms[j] if XM[j, j] < x[j] else fx
        if np.isfinite(fp) and np.isfinite(fm) and XP[j, j] > XM[j, j]:
            g[j] = (fp - fm) / (XP[j, j] - XM[j, j])
        elif np.isfinite(fp) and XP[j, j] > x[j]:
            g[j] = (fp - fx) / (XP[j, j] - x[j])
        elif np.isfinite(fm) and XM[j, j] < x[j]:
            g[j] = (fx - fm) / (x[j] - XM[j, j])
        else:
            g[j] = 0.0
    return g


def bfgs_maximize(
    objective,
    start,
    lower,
    upper,
    *,
    fd_step=1e-4,
    grad_tol=1e-6,
    max_iter=200,
    objective_batch=None,
):
    """Projected quasi-Newton ascent; returns (best_x, best_value).

    Gradients are central finite differences (one-sided at the bounds or
    next to -inf sentinel regions). The backtracking line search rejects
    non-finite values, so the iterate never lands on a sentinel. Returns
    the best iterate seen even on a stall.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    x = np.clip(np.asarray(start, dtype=float), lower, upper)
    m = x.size
    fx = float(objective(x))
    best_x, best_f = x.copy(), fx
    if not np.isfinite(fx):
        return best_x, best_f

    H = np.eye(m)  # inverse Hessian approximation for the ascent direction
    g = _fd_gradient(objective, x, fx, lower, upper, fd_step, objective_batch)
    flat_steps = 0
    first_update = True
    for _ in range(max_iter):
        if np.linalg.norm(g) < grad_tol:
            break
        d = H @ g
        if d @ g <= 0.0:
            d = g.copy()
        # project out components pushing through an active bound
        at_lo = (x <= lower + 1e-15) & (d < 0)
        at_hi = (x >= upper - 1e-15) & (d > 0)
        d[at_lo | at_hi] = 0.0
        if np.linalg.norm(d) == 0.0:
            break
        t = 1.0
        slope = float(g @ d)
        accepted = False
        while t > 1e-12:
            xn = np.clip(x + t * d, lower, upper)
            fn = float(objective(xn))
            if np.isfinite(fn) and fn >= fx + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        flat_steps = flat_steps + 1 if fn - fx < 1e-9 * (1.0 + abs(fx)) else 0
        gn = _fd_gradient(objective, xn, fn, lower, upper, fd_step, objective_batch)
        s = xn - x
        # work in the minimization convention: y_phi = -(gn - g), need s'y_phi > 0
        y_phi = g - gn
        sy = float(s @ y_phi)
        if sy > 1e-12:
            if first_update:
                H = (sy / float(y_phi @ y_phi)) * np.eye(m)  # initial curvature scale
                first_update = False
            rho = 1.0 / sy
            I = np.eye(m)
            H = (I - rho * np.outer(s, y_phi)) @ H @ (I - rho * np.outer(y_phi, s)) + rho * np.outer(s, s)
        x, fx, g = xn, fn, gn
        if fx > best_f:
            best_x, best_f = x.copy(), fx
        if flat_steps >= 3:  # stalled: accepted steps no longer move the value
            break
    return best_x, best_f


def _likelihood_objective(design, basis):
    """Scalar and population-batched views of the concentrated likelihood
    in log10(theta) coordinates, with the trend matrix evaluated once."""
    F = eval_basis(basis, design.points)
    pts = design.points
    y = design.responses_std

    def objective(log_theta):
        return _cll_from_parts(pts, F, y, 10.0 ** np.asarray(log_theta, dtype=float))

    def objective_batch(log_thetas):
        return _cll_batch(pts, F, y, 10.0 ** np.asarray(log_thetas, dtype=float))

    return objective, objective_batch


def _ga_bfgs(objective, objective_batch, m, strategy, seed_points=None):
    lo = np.full(m, LOG_THETA_BOUNDS[0])
    hi = np.full(m, LOG_THETA_BOUNDS[1])
    x0, _ = ga_maximize(
        objective_batch,
        lo,
        hi,
        population=strategy.ga_population,
        generations=strategy.ga_generations,
        seed=strategy.rng_seed,
        stall_generations=strategy.ga_stall_generations,
        seed_points=seed_points,
        vectorized=True,
    )
    x, _ = bfgs_maximize(objective, x0, lo, hi, objective_batch=objective_batch)
    return x


def _theta_from_log(log_theta):
    return Hyperparameters(10.0 ** np.asarray(log_theta, dtype=float))


def tune_exhaustive(design, basis, strategy) -> Hyperparameters:
    """GA followed by BFGS on the concentrated log-likelihood."""
    objective, objective_batch = _likelihood_objective(design, basis)
    log_opt = _ga_bfgs(objective, objective_batch, design.dimension, strategy)
    return _theta_from_log(log_opt)


def tune_simplified(
    state: TuneState,
    design,
    basis,
    strategy,
    *,
    is_first_trend_iteration=False,
    is_final_trend=False,
) -> Hyperparameters:
    """GA+BFGS on the first fit, warm-started BFGS on later fits, and a
    GA+BFGS re-polish once the final trend is selected."""
    objective, objective_batch = _likelihood_objective(design, basis)
    m = design.dimension
    lo = np.full(m, LOG_THETA_BOUNDS[0])
    hi = np.full(m, LOG_THETA_BOUNDS[1])
    warm = state.last_optimum_log_theta
    if is_first_trend_iteration or warm is None:
        log_opt = _ga_bfgs(objective, objective_batch, m, strategy)
    elif is_final_trend:
        # seeding the GA with the warm optimum keeps the polish monotone
        log_opt = _ga_bfgs(objective, objective_batch, m, strategy, seed_points=warm[None, :])
    else:
        # start from whichever previous optimum suits the current objective
        starts = state.previous_optima_log_theta or [warm]
        values = objective_batch(np.asarray(starts))
        start = starts[int(np.argmax(values))]
        log_opt, _ = bfgs_maximize(objective, start, lo, hi, objective_batch=objective_batch)
    state.remember(log_opt)
    return _theta_from_log(log_opt)


def tune_bfgs_only(state: TuneState, design, basis, strategy) -> Hyperparameters:
    """One-shot BFGS from a random start at every fit."""
    objective, objective_batch = _likelihood_objective(design, basis)
    m = design.dimension
    lo = np.full(m, LOG_THETA_BOUNDS[0])
    hi = np.full(m, LOG_THETA_BOUNDS[1])
    rng = np.random.default_rng(
        np.random.SeedSequence([int(strategy.rng_seed), int(state.iteration_counter)])
    )
    start = rng.uniform(lo, hi)
    log_opt, _ = bfgs_maximize(objective, start, lo, hi, objective_batch=objective_batch)
    state.remember(log_opt)
    return _theta_from_log(log_opt)


def tune_for_stage(design, basis, strategy, state, *, first=False, final=False) -> Hyperparameters:
    """Dispatch one fit's tuning according to the configured strategy."""
    if strategy.kind is TuneKind.EXHAUSTIVE_GA_BFGS:
        theta = tune_exhaustive(design, basis, strategy)
        state.remember(np.log10(theta.theta))
        return theta
    if strategy.kind is TuneKind.SIMPLIFIED_GA_BFGS:
        return tune_simplified(
            state, design, basis, strategy,
            is_first_trend_iteration=first, is_final_trend=final,
        )
    return tune_bfgs_only(state, design, basis, strategy)
