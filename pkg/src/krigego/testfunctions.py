"""Synthetic benchmark problems.

Five minimization problems with known optima: Branin, Sasena, Hosaki,
Hartman-6 (optimized under a -log(-y) transformation), and the
eight-dimensional borehole flow model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Problem",
    "PROBLEMS",
    "branin",
    "sasena",
    "hosaki",
    "hartman6",
    "borehole",
    "neglog",
]

_DOMAIN_TOL = 1e-9


def _check_bounds(x, bounds, name):
    x = np.asarray(x, dtype=float)
    b = np.asarray(bounds, dtype=float)
    if x.shape != (b.shape[0],):
        raise ValueError(f"{name} expects a {b.shape[0]}-vector")
    tol = _DOMAIN_TOL * (1.0 + np.abs(b).max(axis=1))
    if np.any(x < b[:, 0] - tol) or np.any(x > b[:, 1] + tol):
        raise ValueError(f"{name} input {x} outside its domain")
    return x


_BRANIN_BOUNDS = np.array([[0.0, 1.0], [0.0, 1.0]])


def branin(x):
    """Branin function on the unit square (three global minima, 0.39788)."""
    x = _check_bounds(x, _BRANIN_BOUNDS, "branin")
    b1 = 15.0 * x[0] - 5.0
    b2 = 15.0 * x[1]
    return float(
        (b2 - 5.1 / (4.0 * math.pi**2) * b1**2 + 5.0 / math.pi * b1 - 6.0) ** 2
        + 10.0 * ((1.0 - 1.0 / (8.0 * math.pi)) * math.cos(b1) + 1.0)
    )


_SASENA_BOUNDS = np.array([[0.0, 5.0], [0.0, 5.0]])


def sasena(x):
    """Sasena function on [0,5]^2 (one global, three local minima)."""
    x = _check_bounds(x, _SASENA_BOUNDS, "sasena")
    x1, x2 = x
    return float(
        2.0
        + 0.01 * (x2 - x1**2) ** 2
        + (1.0 - x1) ** 2
        + 2.0 * (2.0 - x2) ** 2
        + 7.0 * math.sin(0.5 * x1) * math.sin(0.7 * x1 * x2)
    )


_HOSAKI_BOUNDS = np.array([[0.0, 5.0], [0.0, 5.0]])


def hosaki(x):
    """Hosaki function on [0,5]^2; global minimum -2.3458 near (4, 2)."""
    x = _check_bounds(x, _HOSAKI_BOUNDS, "hosaki")
    x1, x2 = x
    poly = 1.0 - 8.0 * x1 + 7.0 * x1**2 - (7.0 / 3.0) * x1**3 + 0.25 * x1**4
    return float(poly * x2**2 * math.exp(-x2))


_HARTMAN6_BOUNDS = np.array([[0.0, 1.0]] * 6)

_HARTMAN6_C = np.array([1.0, 1.2, 3.0, 3.2])
_HARTMAN6_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_HARTMAN6_P = 1e-4 * np.array(
    [
        [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
        [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
        [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
        [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
    ]
)


def hartman6(x, transformed=False):
    """Hartman-6 on the unit cube; raw minimum -3.32237.

    With transformed=True returns -log(-y), which is only defined for the
    (always negative) raw values.
    """
    x = _check_bounds(x, _HARTMAN6_BOUNDS, "hartman6")
    inner = np.sum(_HARTMAN6_A * (x[None, :] - _HARTMAN6_P) ** 2, axis=1)
    y = -float(np.sum(_HARTMAN6_C * np.exp(-inner)))
    if transformed:
        return neglog(y)
    return y


def neglog(y):
    """The -log(-y) transformation; monotone increasing for y < 0."""
    if y >= 0.0:
        raise ValueError(f"-log(-y) needs a negative value, got {y}")
    return float(-math.log(-y))


_BOREHOLE_BOUNDS = np.array(
    [
        [0.05, 0.15],       # r_w, borehole radius
        [100.0, 50000.0],   # r, radius of influence
        [63700.0, 115600.0],  # T_u, upper aquifer transmissivity
        [990.0, 1100.0],    # H_u, upper aquifer head
        [63.1, 116.0],      # T_l, lower aquifer transmissivity
        [700.0, 820.0],     # H_l, lower aquifer head
        [1120.0, 1680.0],   # L, borehole length
        [9855.0, 12045.0],  # K_w, hydraulic conductivity
    ]
)


def borehole(x):
    """Borehole water-flow model over the standard eight-variable box."""
    x = _check_bounds(x, _BOREHOLE_BOUNDS, "borehole")
    r_w, r, T_u, H_u, T_l, H_l, L, K_w = x
    log_ratio = math.log(r / r_w)
    return float(
        2.0 * math.pi * T_u * (H_u - H_l)
        / (log_ratio * (1.0 + 2.0 * L * T_u / (log_ratio * r_w**2 * K_w) + T_u / T_l))
    )


@dataclass(frozen=True)
class Problem:
    """One benchmark: objective, box, known optimum, and run defaults."""

    name: str
    dimension: int
    raw_bounds: np.ndarray
    objective: Callable[[np.ndarray], float]
    known_optimum_value: float
    n_init_default: int
    n_upd_default: int
    transform: str | None = None  # applied before surrogate training
    pmax_defaults: dict = field(default_factory=dict)

    def evaluate(self, x_raw) -> float:
        """Objective in raw units."""
        return self.objective(x_raw)

    def train_value(self, y_raw: float) -> float:
        """Map a raw response onto the scale the surrogate is trained on."""
        if self.transform is None:
            return y_raw
        if self.transform == "neglog":
            return neglog(y_raw)
        raise ValueError(f"unknown transform {self.transform}")


PROBLEMS: dict[str, Problem] = {
    "branin": Problem(
        name="branin",
        dimension=2,
        raw_bounds=_BRANIN_BOUNDS,
        objective=branin,
        known_optimum_value=0.39788,
        n_init_default=20,
        n_upd_default=10,
        pmax_defaults={"pck-tensor": 4, "pck-to": 4, "pck-tf": 2, "bk": 2},
    ),
    "sasena": Problem(
        name="sasena",
        dimension=2,
        raw_bounds=_SASENA_BOUNDS,
        objective=sasena,
        known_optimum_value=-1.4565,
        n_init_default=20,
        n_upd_default=20,
        pmax_defaults={"pck-tensor": 4, "pck-to": 4, "pck-tf": 2, "bk": 2},
    ),
    "hosaki": Problem(
        name="hosaki",
        dimension=2,
        raw_bounds=_HOSAKI_BOUNDS,
        objective=hosaki,
        known_optimum_value=-2.3458,
        n_init_default=12,
        n_upd_default=10,
        pmax_defaults={"pck-tensor": 4, "pck-to": 4, "pck-tf": 2, "bk": 2},
    ),
    "hartman6": Problem(
        name="hartman6",
        dimension=6,
        raw_bounds=_HARTMAN6_BOUNDS,
        objective=hartman6,
        known_optimum_value=-3.32237,
        n_init_default=60,
        n_upd_default=25,
        transform="neglog",
        pmax_defaults={"pck-tensor": 2, "pck-to": 3, "pck-tf": 2, "bk": 2},
    ),
    "borehole": Problem(
        name="borehole",
        dimension=8,
        raw_bounds=_BOREHOLE_BOUNDS,
        objective=borehole,
        known_optimum_value=7.8198,
        n_init_default=40,
        n_upd_default=10,
        pmax_defaults={"pck-tensor": 2, "pck-to": 2, "pck-tf": 2, "bk": 2},
    ),
}
