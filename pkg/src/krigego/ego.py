"""Expected improvement and the adaptive sampling loop.

One update: rebuild the surrogate on the current design, maximize expected
improvement with the hybrid GA + quasi-Newton search, guard against
re-proposing an existing sample, evaluate the objective, and grow the
design. Runs are strictly sequential; independent runs may execute in
parallel with their own seed streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .hyperopt import bfgs_maximize, ga_maximize
from .kriging import ExperimentalDesign, KrigingModel

__all__ = [
    "GUARD_RADIUS",
    "AcquisitionContext",
    "EgoState",
    "EgoRunError",
    "expected_improvement",
    "maximize_ei",
    "ego_step",
    "ego_run_states",
]

# Minimum allowed distance between design points in normalized units;
# closer proposals would wreck the correlation matrix conditioning.
GUARD_RADIUS = 1e-8

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class EgoRunError(RuntimeError):
    """Objective evaluation failed; carries the partial state."""

    def __init__(self, message, state):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class AcquisitionContext:
    """Everything expected improvement needs: the model and the incumbent."""

    model: KrigingModel
    y_min: float


def expected_improvement(f_hat, s, y_min, s_floor=0.0):
    """E[max(y_min - Y, 0)] for Y ~ N(f_hat, s^2), via the erf form.

    Predictions with s below the floor are treated as exact, giving zero
    improvement. Accepts scalars or arrays.
    """
    f = np.asarray(f_hat, dtype=float)
    sv = np.asarray(s, dtype=float)
    scalar = f.ndim == 0 and sv.ndim == 0
    f, sv = np.atleast_1d(f), np.atleast_1d(sv)
    f, sv = np.broadcast_arrays(f, sv)
    out = np.zeros(f.shape)
    ok = sv > max(s_floor, 0.0)
    if np.any(ok):
        d = y_min - f[ok]
        si = sv[ok]
        cdf = 0.5 + 0.5 * erf(d / (si * _SQRT2))
        pdf = _INV_SQRT_2PI * np.exp(-(d**2) / (2.0 * si**2))
        out[ok] = d * cdf + si * pdf
    out = np.maximum(out, 0.0)
    return float(out[0]) if scalar else out


@dataclass
class EgoState:
    """Mutable per-run bookkeeping for the sampling loop."""

    design: ExperimentalDesign
    best_point: np.ndarray
    best_value: float  # training-scale, consistent with the design responses
    iteration: int = 0
    history: list = field(default_factory=list)  # (iteration, x_norm, y, best)


def initial_state(design: ExperimentalDesign) -> EgoState:
    i = int(np.argmin(design.responses_raw))
    return EgoState(
        design=design,
        best_point=design.points[i].copy(),
        best_value=float(design.responses_raw[i]),
    )


def maximize_ei(model: KrigingModel, seed, *, population=100, generations=200, stall_generations=30):
    """Hybrid GA + quasi-Newton maximization of expected improvement.

    The GA explores [-1, 1]^m with batched model evaluations and the local
    search polishes its incumbent. Deterministic for a fixed seed; returns
    (x_next, ei_value) even when the surface is numerically flat.
    """
    m = model.design.dimension
    y_min = float(np.min(model.design.responses_raw))
    s_floor = 1e-12 * model.design.std_y

    def ei_batch(X):
        f = model.predict_many(X)
        s = np.sqrt(model.predict_mse_many(X))
        return expected_improvement(f, s, y_min, s_floor=s_floor)

    lo = np.full(m, -1.0)
    hi = np.full(m, 1.0)
    x_ga, _ = ga_maximize(
        ei_batch, lo, hi,
        population=population, generations=generations,
        seed=seed, stall_generations=stall_generations, vectorized=True,
    )
    x_best, ei_best = bfgs_maximize(lambda x: float(ei_batch(x[None, :])[0]), x_ga, lo, hi)
    return x_best, float(ei_best)


def _apply_guard(x, design, rng):
    """Push a proposal that collides with an existing sample out to the
    guard radius along a random direction (clipped back into the box)."""
    pts = design.points
    m = pts.shape[1]
    radius = GUARD_RADIUS
    for _ in range(64):
        d = np.linalg.norm(pts - x, axis=1)
        nearest = int(np.argmin(d))
        if d[nearest] >= GUARD_RADIUS:
            return x
        direction = rng.normal(size=m)
        direction /= np.linalg.norm(direction)
        x = np.clip(pts[nearest] + radius * direction, -1.0, 1.0)
        radius *= 2.0
    raise RuntimeError("could not displace duplicate proposal")


def ego_step(state: EgoState, surrogate_builder, objective, seed):
    """One update: build, acquire, guard, evaluate, grow.

    `surrogate_builder(design, seed)` returns (model, trace-or-None);
    `objective(x_norm)` returns the training-scale response. Mutates and
    returns the state; evaluation failures raise EgoRunError with the
    partial state attached.
    """
    ss = np.random.SeedSequence([int(seed), state.iteration])
    builder_seed, ei_seed, guard_seed = (int(s) for s in ss.generate_state(3))
    model, trace = surrogate_builder(state.design, builder_seed)
    x_next, ei_value = maximize_ei(model, ei_seed)
    x_next = _apply_guard(x_next, state.design, np.random.default_rng(guard_seed))
    try:
        y_next = float(objective(x_next))
    except Exception as exc:
        raise EgoRunError(f"objective evaluation failed: {exc}", state) from exc
    state.design = state.design.append(x_next, y_next)
    if y_next < state.best_value:
        state.best_value = y_next
        state.best_point = np.asarray(x_next, dtype=float).copy()
    state.iteration += 1
    state.history.append(
        {
            "iteration": state.iteration,
            "x_norm": np.asarray(x_next, dtype=float).copy(),
            "y": y_next,
            "best": state.best_value,
            "ei": ei_value,
            "trace": trace.to_dict() if trace is not None else None,
        }
    )
    return state


def ego_run_states(design, surrogate_builder, objective, n_updates, seed):
    """Run n_updates sequential steps from an initial design.

    Returns the final EgoState; the per-step history lives on the state.
    """
    state = initial_state(design)
    for _ in range(int(n_updates)):
        ego_step(state, surrogate_builder, objective, seed)
    return state
