"""Kriging core: correlation model, trend regression, prediction, and
leave-one-out cross-validation.

All internal algebra runs on standardized responses; raw response units
appear only at the public predict/LOOCV boundary. The correlation matrix is
regularized with a small nugget that escalates geometrically when the
Cholesky factorization fails.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from functools import partial
from scipy.linalg import LinAlgError, qr
from scipy.linalg import solve_triangular as _solve_triangular

# hot paths pass validated float arrays already
solve_triangular = partial(_solve_triangular, check_finite=False)

from .polybasis import BasisSpec, eval_basis

__all__ = [
    "KrigingError",
    "IllConditionedError",
    "SingularTrendError",
    "DegenerateResponseError",
    "THETA_MIN",
    "THETA_MAX",
    "LOG_THETA_BOUNDS",
    "NUGGET_INITIAL",
    "NUGGET_MAX",
    "Hyperparameters",
    "ExperimentalDesign",
    "KrigingModel",
    "gauss_corr",
    "build_corr_matrix",
    "gls_coefficients",
    "sigma2_hat",
    "concentrated_log_likelihood",
    "fit",
    "predict",
    "predict_mse",
    "loocv_rmse",
    "normalize_point",
    "denormalize_point",
    "standardize_outputs",
]

THETA_MIN = 1e-3
THETA_MAX = 1e3
LOG_THETA_BOUNDS = (-3.0, 3.0)

NUGGET_INITIAL = 1e-12
NUGGET_MAX = 1e-6

_SENTINEL = -np.inf
_SIGMA2_FLOOR = 1e-30
_BOUND_TOL = 1e-9


class KrigingError(Exception):
    """Base class for surrogate-construction failures."""


class IllConditionedError(KrigingError):
    """Correlation matrix not positive definite after maximum regularization."""

    def __init__(self, nugget: float):
        super().__init__(f"correlation matrix not SPD with nugget up to {nugget:g}")
        self.nugget = nugget


class SingularTrendError(KrigingError):
    """Trend matrix is rank deficient (or has more columns than samples)."""


class DegenerateResponseError(KrigingError):
    """Responses carry no variance; the model cannot be standardized."""


@dataclass(frozen=True)
class Hyperparameters:
    """Per-dimension correlation decay rates, bounded to [1e-3, 1e3]."""

    theta: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", th)
        if th.ndim != 1 or th.size == 0:
            raise ValueError("theta must be a 1-D vector")
        if np.any(th < THETA_MIN * (1 - 1e-12)) or np.any(th > THETA_MAX * (1 + 1e-12)):
            raise ValueError(f"theta outside [{THETA_MIN:g}, {THETA_MAX:g}]: {th}")

    @property
    def dimension(self) -> int:
        return self.theta.size


def standardize_outputs(y_raw):
    """Center and scale responses to zero mean, unit population std."""
    y = np.asarray(y_raw, dtype=float)
    if y.size < 2:
        raise ValueError("need at least two responses")
    mean_y = float(np.mean(y))
    std_y = float(np.std(y))  # population convention, matching the 1/n variance MLE
    if not std_y > 0.0:
        raise DegenerateResponseError("responses have zero variance")
    return (y - mean_y) / std_y, mean_y, std_y


def normalize_point(x_raw, raw_bounds):
    """Affine map from problem units into [-1, 1] per coordinate."""
    x = np.asarray(x_raw, dtype=float)
    b = np.asarray(raw_bounds, dtype=float)
    lo, hi = b[:, 0], b[:, 1]
    span = hi - lo
    tol = 1e-12 * (1.0 + np.abs(lo) + np.abs(hi))
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        raise ValueError(f"point {x} outside bounds")
    return np.clip(2.0 * (x - lo) / span - 1.0, -1.0, 1.0)


def denormalize_point(x_norm, raw_bounds):
    """Inverse of :func:`normalize_point`."""
    x = np.asarray(x_norm, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ValueError(f"normalized point {x} outside [-1, 1]")
    b = np.asarray(raw_bounds, dtype=float)
    lo, hi = b[:, 0], b[:, 1]
    return lo + (np.clip(x, -1.0, 1.0) + 1.0) * 0.5 * (hi - lo)


@dataclass(frozen=True)
class ExperimentalDesign:
    """Sample matrix (normalized to [-1,1]) plus raw and standardized responses."""

    points: np.ndarray         # (n, m) in [-1, 1]
    raw_bounds: np.ndarray     # (m, 2)
    responses_raw: np.ndarray  # (n,)
    responses_std: np.ndarray  # (n,)
    mean_y: float
    std_y: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "raw_bounds", np.asarray(self.raw_bounds, dtype=float))
        object.__setattr__(self, "responses_raw", np.asarray(self.responses_raw, dtype=float))
        object.__setattr__(self, "responses_std", np.asarray(self.responses_std, dtype=float))
        n, m = pts.shape
        if n < 2:
            raise ValueError("experimental design needs n >= 2")
        if self.raw_bounds.shape != (m, 2):
            raise ValueError("raw_bounds must be (m, 2)")
        if np.any(np.abs(pts) > 1.0 + _BOUND_TOL):
            raise ValueError("normalized coordinates must lie in [-1, 1]")
        if self.responses_raw.shape != (n,) or self.responses_std.shape != (n,):
            raise ValueError("responses must be length-n vectors")
        d2 = _sq_distances(pts, pts)
        np.fill_diagonal(d2, np.inf)
        if not np.all(d2 > 0.0):
            raise ValueError("design contains duplicate points")

    @classmethod
    def from_normalized(cls, points, raw_bounds, responses_raw):
        y_std, mean_y, std_y = standardize_outputs(responses_raw)
        return cls(points, raw_bounds, responses_raw, y_std, mean_y, std_y)

    @classmethod
    def from_raw(cls, raw_points, raw_bounds, responses_raw):
        pts = np.array([normalize_point(x, raw_bounds) for x in np.atleast_2d(raw_points)])
        return cls.from_normalized(pts, raw_bounds, responses_raw)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def append(self, x_norm, y_raw) -> "ExperimentalDesign":
        """New design with one extra sample; restandardizes the responses."""
        pts = np.vstack([self.points, np.asarray(x_norm, dtype=float)])
        ys = np.append(self.responses_raw, float(y_raw))
        return ExperimentalDesign.from_normalized(pts, self.raw_bounds, ys)


def _sq_distances(A, B):
    # theta-weighted later; plain squared coordinate differences here
    return ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=-1)


def _weighted_sq_distances(A, B, theta):
    return ((A[:, None, :] - B[None, :, :]) ** 2 * theta[None, None, :]).sum(axis=-1)


def gauss_corr(x1, x2, theta):
    """Gaussian correlation exp(-sum_k theta_k |x1_k - x2_k|^2).

    The exponent is fixed at 2 (not a tunable hyperparameter).
    """
    th = theta.theta if isinstance(theta, Hyperparameters) else np.asarray(theta, float)
    a = np.asarray(x1, dtype=float)
    b = np.asarray(x2, dtype=float)
    if a.shape != b.shape:
        raise ValueError("point dimensions differ")
    return float(np.exp(-np.sum(th * (a - b) ** 2)))


def _corr_matrix(points, theta):
    R = np.exp(-_weighted_sq_distances(points, points, theta))
    return R


def _cross_corr(points, X, theta, block=4096):
    """Correlation between design points (n, m) and queries (q, m) -> (n, q)."""
    n = points.shape[0]
    q = X.shape[0]
    out = np.empty((n, q))
    for s in range(0, q, block):
        e = min(q, s + block)
        out[:, s:e] = np.exp(-_weighted_sq_distances(points, X[s:e], theta))
    return out


def build_corr_matrix(points, theta, nugget=NUGGET_INITIAL):
    """Correlation matrix of the design, returned as a lower Cholesky factor.

    The nugget starts at the given value and is escalated geometrically
    (x10, capped at NUGGET_MAX) until the factorization succeeds; raises
    IllConditionedError carrying the last nugget tried.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    th = theta.theta if isinstance(theta, Hyperparameters) else np.asarray(theta, float)
    if nugget < 0:
        raise ValueError("nugget must be >= 0")
    R = _corr_matrix(pts, th)
    eye = np.eye(pts.shape[0])
    nug = nugget
    while True:
        try:
            L = np.linalg.cholesky(R + nug * eye)
            return L, nug
        except LinAlgError:
            if nug >= NUGGET_MAX:
                raise IllConditionedError(nug) from None
            nug = max(nug * 10.0, NUGGET_INITIAL)


def gls_coefficients(F, L, y):
    """Generalized least squares via triangular solves (no explicit inverse).

    Solves alpha = (F' R^-1 F)^-1 F' R^-1 y given the lower Cholesky factor
    L of R. Full column rank of the whitened trend matrix is checked with a
    column-pivoted factorization; deficiency raises SingularTrendError.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    G = solve_triangular(L, F, lower=True)
    c = solve_triangular(L, np.asarray(y, dtype=float), lower=True)
    Q, Rq, piv = qr(G, mode="economic", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(Rq))
    if diag.size == 0 or diag.min() <= max(G.shape) * np.finfo(float).eps * diag.max():
        raise SingularTrendError("trend matrix is rank deficient under this correlation")
    alpha = np.empty(G.shape[1])
    alpha[piv] = solve_triangular(Rq, Q.T @ c, lower=False)
    return alpha, G, (Rq, piv)


def sigma2_hat(F, L, y, alpha):
    """Process-variance MLE (1/n) (y - F a)' R^-1 (y - F a)."""
    e = np.asarray(y, dtype=float) - F @ alpha
    w = solve_triangular(L, e, lower=True)
    return float(w @ w) / len(e)


def _cll_from_parts(points, F, y, theta, nugget=NUGGET_INITIAL):
    try:
        L, _ = build_corr_matrix(points, theta, nugget)
        alpha, _, _ = gls_coefficients(F, L, y)
        s2 = sigma2_hat(F, L, y, alpha)
    except KrigingError:
        return _SENTINEL
    if s2 <= _SIGMA2_FLOOR:
        return _SENTINEL
    n = len(y)
    log_det = 2.0 * float(np.sum(np.log(np.diag(L))))
    return -n * float(np.log(s2)) - log_det


def concentrated_log_likelihood(design, basis, theta, nugget=NUGGET_INITIAL):
    """Concentrated log-likelihood -n ln(sigma2_hat) - ln|R| at theta.

    Returns -inf when the factorization fails or the variance collapses,
    so optimizer callbacks stay total.
    """
    th = theta.theta if isinstance(theta, Hyperparameters) else np.asarray(theta, float)
    F = eval_basis(basis, design.points)
    return _cll_from_parts(design.points, F, design.responses_std, th, nugget)


def _cll_batch(points, F, y, thetas, nugget=NUGGET_INITIAL):
    """Concentrated log-likelihood at a batch of theta vectors.

    Stacked LAPACK calls across the batch; individuals whose factorization
    breaks down fall back to the scalar path (which escalates the nugget).
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    q, m = thetas.shape
    n, P = F.shape
    D = (points[:, None, :] - points[None, :, :]) ** 2       # (n, n, m)
    S = np.tensordot(thetas, D, axes=([1], [2]))             # (q, n, n)
    R = np.exp(-S) + nugget * np.eye(n)[None, :, :]
    out = np.empty(q)
    try:
        Ls = np.linalg.cholesky(R)
    except LinAlgError:
        for i in range(q):
            out[i] = _cll_from_parts(points, F, y, thetas[i], nugget)
        return out
    rhs = np.concatenate([np.broadcast_to(F, (q, n, P)), np.broadcast_to(y[:, None], (q, n, 1))], axis=2)
    GC = np.linalg.solve(Ls, rhs)                            # whitened [F | y]
    G = GC[:, :, :P]
    c = GC[:, :, P]
    A = np.einsum("qnp,qnr->qpr", G, G)
    Gc = np.einsum("qnp,qn->qp", G, c)
    try:
        alpha = np.linalg.solve(A, Gc[:, :, None])[:, :, 0]
    except LinAlgError:
        for i in range(q):
            out[i] = _cll_from_parts(points, F, y, thetas[i], nugget)
        return out
    resid = c - np.einsum("qnp,qp->qn", G, alpha)
    s2 = np.sum(resid**2, axis=1) / n
    log_det = 2.0 * np.sum(np.log(np.diagonal(Ls, axis1=1, axis2=2)), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = -n * np.log(s2) - log_det
    bad = ~np.isfinite(vals) | (s2 <= _SIGMA2_FLOOR)
    vals = np.where(bad, _SENTINEL, vals)
    return vals


@dataclass
class KrigingModel:
    """A fitted surrogate. Treat as immutable; prediction methods are
    read-only and safe for concurrent use."""

    design: ExperimentalDesign
    basis: BasisSpec
    theta: Hyperparameters
    alpha: np.ndarray
    sigma2: float            # variance of the standardized process
    nugget: float
    chol: np.ndarray         # lower factor of R + nugget I
    F: np.ndarray            # (n, P) trend matrix
    degenerate: bool = False
    _G: np.ndarray = field(default=None, repr=False)      # L^-1 F
    _Rq: tuple = field(default=None, repr=False)          # pivoted QR factor of G
    _w: np.ndarray = field(default=None, repr=False)      # R^-1 (y - F alpha)
    _loocv: float | None = field(default=None, repr=False)

    @property
    def trend_size(self) -> int:
        return self.F.shape[1]

    @property
    def sigma2_hat(self) -> float:
        return self.sigma2

    @property
    def loocv_rmse(self) -> float:
        if self._loocv is None:
            self._loocv = loocv_rmse(self)
        return self._loocv

    def predict(self, x):
        return predict(self, x)

    def predict_mse(self, x):
        return predict_mse(self, x)

    def predict_many(self, X):
        return _predict_many(self, np.atleast_2d(np.asarray(X, dtype=float)))

    def predict_mse_many(self, X):
        return _predict_mse_many(self, np.atleast_2d(np.asarray(X, dtype=float)))

    def describe(self) -> dict:
        """Structured debug snapshot (not a compatibility surface)."""
        return {
            "theta": [float(t) for t in self.theta.theta],
            "alpha": [float(a) for a in self.alpha],
            "sigma2": float(self.sigma2),
            "index_set": [list(z) for z in self.basis.index_set.indices],
            "design": {
                "points": self.design.points.tolist(),
                "raw_bounds": self.design.raw_bounds.tolist(),
                "responses": self.design.responses_raw.tolist(),
            },
        }

    def to_debug_text(self) -> str:
        return json.dumps(self.describe(), sort_keys=True, indent=2)


def fit(design, basis, theta, nugget=NUGGET_INITIAL) -> KrigingModel:
    """Assemble a Kriging model at fixed hyperparameters.

    A constant-only basis yields ordinary Kriging. Propagates
    ill-conditioning and rank-deficiency errors; a saturated trend with
    zero residual variance is flagged degenerate rather than rejected.
    """
    th = theta if isinstance(theta, Hyperparameters) else Hyperparameters(np.asarray(theta, float))
    F = eval_basis(basis, design.points)
    n, P = F.shape
    if P > n:
        raise SingularTrendError(f"trend has {P} terms for {n} samples")
    L, nug = build_corr_matrix(design.points, th, nugget)
    alpha, G, Rq = gls_coefficients(F, L, design.responses_std)
    s2 = sigma2_hat(F, L, design.responses_std, alpha)
    e = design.responses_std - F @ alpha
    z = solve_triangular(L, e, lower=True)
    w = solve_triangular(L.T, z, lower=False)
    return KrigingModel(
        design=design,
        basis=basis,
        theta=th,
        alpha=alpha,
        sigma2=s2,
        nugget=nug,
        chol=L,
        F=F,
        degenerate=s2 <= _SIGMA2_FLOOR,
        _G=G,
        _Rq=Rq,
        _w=w,
    )


def _predict_many(model, X):
    Psi = eval_basis(model.basis, X)                   # (q, P)
    r = _cross_corr(model.design.points, X, model.theta.theta)  # (n, q)
    f_std = Psi @ model.alpha + r.T @ model._w
    return model.design.mean_y + model.design.std_y * f_std


def _predict_mse_many(model, X):
    r = _cross_corr(model.design.points, X, model.theta.theta)  # (n, q)
    V = solve_triangular(model.chol, r, lower=True)             # L^-1 r
    quad_r = np.sum(V * V, axis=0)
    Psi = eval_basis(model.basis, X)                            # (q, P)
    U = model._G.T @ V - Psi.T                                  # (P, q)
    Rq, piv = model._Rq
    Zt = solve_triangular(Rq.T, U[piv], lower=True)
    quad_u = np.sum(Zt * Zt, axis=0)
    mse_std = model.sigma2 * (1.0 - quad_r + quad_u)
    return np.maximum(mse_std, 0.0) * model.design.std_y**2


def predict(model, x):
    """Response prediction at one point, in raw problem units."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.design.dimension:
        raise ValueError("query dimension mismatch")
    return float(_predict_many(model, x[None, :])[0])


def predict_mse(model, x):
    """Prediction mean-squared error at one point, raw units squared.

    Clamped at zero: the exact expression can go slightly negative in
    floating point near design points.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.design.dimension:
        raise ValueError("query dimension mismatch")
    return float(_predict_mse_many(model, x[None, :])[0])


def loocv_rmse(model) -> float:
    """Analytic leave-one-out RMSE with hyperparameters held fixed.

    Partitioned-matrix identity: with the bordered system
    C = [[R, F], [F', 0]], the deletion residual at sample i is
    (Q y)_i / Q_ii where Q = R^-1 - R^-1 F (F' R^-1 F)^-1 F' R^-1 is the
    top-left block of C^-1. Numerically equal to refitting n reduced
    models at frozen theta. Returned in raw response units.
    """
    n = model.design.n
    P = model.trend_size
    if n < 3:
        raise ValueError("leave-one-out needs n >= 3")
    if P >= n - 1:
        raise SingularTrendError("trend too large for leave-one-out (P >= n-1)")
    Linv = solve_triangular(model.chol, np.eye(n), lower=True)
    Rinv = Linv.T @ Linv
    RinvF = Rinv @ model.F
    S = model.F.T @ RinvF
    Q = Rinv - RinvF @ np.linalg.solve(S, RinvF.T)
    errors = (Q @ model.design.responses_std) / np.diag(Q)
    return float(np.sqrt(np.mean(errors**2))) * model.design.std_y
