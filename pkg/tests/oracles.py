"""Independent oracles used by the test suite.

Everything here is deliberately written against the library's internal
code paths: dense grids plus local refinement for minima, explicit naive
refits for leave-one-out, closed-form constant-trend kriging, the
cdf/pdf form of expected improvement, and re-derived copies of the
benchmark functions with differently arranged arithmetic.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import minimize
from scipy.special import ndtr
from scipy.stats import qmc  # only for oracle multistarts, not used by the package

from krigego.kriging import build_corr_matrix, gls_coefficients
from krigego.polybasis import eval_basis
from scipy.linalg import solve_triangular


def grid_refine_min(f, bounds, grid_n=201, top_k=8):
    """Dense-grid scan of a 2-D box followed by local refinement."""
    b = np.asarray(bounds, dtype=float)
    assert b.shape[0] == 2
    g1 = np.linspace(b[0, 0], b[0, 1], grid_n)
    g2 = np.linspace(b[1, 0], b[1, 1], grid_n)
    X1, X2 = np.meshgrid(g1, g2, indexing="ij")
    vals = np.array([[f(np.array([x1, x2])) for x2 in g2] for x1 in g1])
    order = np.argsort(vals, axis=None)[:top_k]
    best_x, best_f = None, math.inf
    for flat in order:
        i, j = np.unravel_index(flat, vals.shape)
        res = minimize(
            lambda x: f(np.clip(x, b[:, 0], b[:, 1])),
            np.array([X1[i, j], X2[i, j]]),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000},
        )
        if res.fun < best_f:
            best_x, best_f = np.clip(res.x, b[:, 0], b[:, 1]), float(res.fun)
    return best_x, best_f


def multistart_min(f, bounds, n_starts=64, seed=0):
    """Multi-start bounded local search for higher-dimensional boxes."""
    b = np.asarray(bounds, dtype=float)
    m = b.shape[0]
    starts = qmc.LatinHypercube(d=m, seed=seed).random(n_starts)
    starts = b[:, 0] + starts * (b[:, 1] - b[:, 0])
    best_x, best_f = None, math.inf
    for x0 in starts:
        res = minimize(f, x0, method="L-BFGS-B", bounds=list(map(tuple, b)))
        if res.fun < best_f:
            best_x, best_f = res.x, float(res.fun)
    return best_x, best_f


def naive_loocv(model):
    """Leave-one-out RMSE by literally refitting n reduced models with the
    hyperparameters (and nugget) frozen at the full model's values."""
    ed = model.design
    n = ed.n
    errs = []
    for i in range(n):
        keep = [j for j in range(n) if j != i]
        pts = ed.points[keep]
        y = ed.responses_std[keep]
        L, _ = build_corr_matrix(pts, model.theta, model.nugget)
        F = eval_basis(model.basis, pts)
        alpha, _, _ = gls_coefficients(F, L, y)
        e = y - F @ alpha
        w = solve_triangular(L.T, solve_triangular(L, e, lower=True), lower=False)
        r = np.exp(-((pts - ed.points[i]) ** 2 * model.theta.theta).sum(axis=1))
        psi = eval_basis(model.basis, ed.points[i])
        errs.append(ed.responses_std[i] - (psi @ alpha + r @ w))
    return float(np.sqrt(np.mean(np.asarray(errs) ** 2))) * ed.std_y


class OkClosedForm:
    """Dedicated constant-trend kriging path from the textbook formulas:
    mu = (1'R^-1 y)/(1'R^-1 1), prediction mu + r'R^-1(y - mu), and MSE
    sigma2 [1 - r'R^-1 r + (1 - 1'R^-1 r)^2 / (1'R^-1 1)]."""

    def __init__(self, design, theta, nugget):
        self.design = design
        self.theta = np.asarray(getattr(theta, "theta", theta), dtype=float)
        d2 = ((design.points[:, None, :] - design.points[None, :, :]) ** 2 * self.theta).sum(-1)
        R = np.exp(-d2) + nugget * np.eye(design.n)
        self.cho = cho_factor(R, lower=True)
        y = design.responses_std
        ones = np.ones(design.n)
        self.Ri_y = cho_solve(self.cho, y)
        self.Ri_1 = cho_solve(self.cho, ones)
        self.mu = float(ones @ self.Ri_y) / float(ones @ self.Ri_1)
        resid = y - self.mu * ones
        self.Ri_resid = cho_solve(self.cho, resid)
        self.sigma2 = float(resid @ self.Ri_resid) / design.n

    def _r(self, x):
        d2 = ((self.design.points - np.asarray(x)) ** 2 * self.theta).sum(-1)
        return np.exp(-d2)

    def predict(self, x):
        r = self._r(x)
        f_std = self.mu + r @ self.Ri_resid
        return self.design.mean_y + self.design.std_y * f_std

    def predict_mse(self, x):
        r = self._r(x)
        Ri_r = cho_solve(self.cho, r)
        ones = np.ones(self.design.n)
        term = (1.0 - ones @ Ri_r) ** 2 / float(ones @ self.Ri_1)
        mse = self.sigma2 * (1.0 - r @ Ri_r + term)
        return max(mse, 0.0) * self.design.std_y**2


def ei_phi_form(f_hat, s, y_min):
    """Expected improvement through the normal cdf/pdf (not erf)."""
    if s <= 0.0:
        return 0.0
    u = (y_min - f_hat) / s
    return (y_min - f_hat) * float(ndtr(u)) + s * float(
        np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)
    )


# Independently hand-coded duplicates of the benchmark functions, arranged
# differently from the package implementations on purpose.

def branin_dup(x):
    u = 15.0 * x[0] - 5.0
    v = 15.0 * x[1]
    a = v - 5.1 * u * u / (4.0 * np.pi**2) + (5.0 / np.pi) * u - 6.0
    return a * a + 10.0 * (1.0 - 1.0 / (8.0 * np.pi)) * np.cos(u) + 10.0


def sasena_dup(x):
    x1, x2 = float(x[0]), float(x[1])
    out = 2.0
    out += 0.01 * (x2 - x1 * x1) ** 2
    out += (1.0 - x1) ** 2
    out += 2.0 * (2.0 - x2) ** 2
    out += 7.0 * np.sin(0.5 * x1) * np.sin(0.7 * x1 * x2)
    return out


def hosaki_dup(x):
    x1, x2 = float(x[0]), float(x[1])
    c = [1.0, -8.0, 7.0, -7.0 / 3.0, 0.25]
    poly = sum(ck * x1**k for k, ck in enumerate(c))
    return poly * x2 * x2 * np.exp(-x2)


_H6_ALPHA = [1.0, 1.2, 3.0, 3.2]
_H6_A = [
    [10, 3, 17, 3.5, 1.7, 8],
    [0.05, 10, 17, 0.1, 8, 14],
    [3, 3.5, 1.7, 10, 17, 8],
    [17, 8, 0.05, 10, 0.1, 14],
]
_H6_P = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
]


def hartman6_dup(x):
    total = 0.0
    for i in range(4):
        expo = 0.0
        for j in range(6):
            expo -= _H6_A[i][j] * (float(x[j]) - _H6_P[i][j]) ** 2
        total -= _H6_ALPHA[i] * math.exp(expo)
    return total


def borehole_dup(x):
    r_w, r, T_u, H_u, T_l, H_l, L, K_w = (float(v) for v in x)
    lnr = math.log(r) - math.log(r_w)
    numer = 2.0 * math.pi * T_u * (H_u - H_l)
    denom = lnr + 2.0 * L * T_u / (r_w**2 * K_w) + lnr * T_u / T_l
    return numer / denom
