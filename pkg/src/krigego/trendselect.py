"""Automatic trend-function selection.

Four builders on top of the kriging core:

* Bayesian forward selection over linear/quadratic effect candidates,
  ranked by posterior coefficient magnitude (blind-Kriging style).
* Least-angle-regression ordering of a Legendre dictionary with a full
  surrogate refit at every step ("optimal" construction).
* Frequentist variant ranking a fixed dictionary by GLS coefficient
  magnitude.
* Fixed total-order Legendre trend with no selection.

Every builder compares candidate models by leave-one-out RMSE and stops a
scan once the error grows three times in a row.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .hyperopt import TuneState, TuneStrategy, tune_for_stage
from .kriging import (
    ExperimentalDesign,
    KrigingError,
    KrigingModel,
    SingularTrendError,
    fit,
    gls_coefficients,
    loocv_rmse,
)
from .polybasis import (
    BK_DISTANCE_SCALE,
    BasisSpec,
    IndexScheme,
    MultiIndex,
    MultiIndexSet,
    PolyFamily,
    bk_encode,
    constant_index_set,
    eval_basis,
    generate_index_set,
    to_encoding_domain,
)

__all__ = [
    "CandidateSet",
    "SelectionTrace",
    "BkPosterior",
    "bk_k_factors",
    "bk_posterior_beta",
    "build_bk",
    "lars_select",
    "build_pck",
    "build_uk_frequentist",
    "build_uk_fixed",
]

log = logging.getLogger(__name__)

_EARLY_STOP_RUN = 3  # consecutive strict LOOCV increases that end a scan


@dataclass(frozen=True)
class CandidateSet:
    """Full candidate dictionary for one scan."""

    spec: BasisSpec
    p: int
    scheme: IndexScheme


@dataclass
class SelectionTrace:
    """Record of one trend-selection scan (step 0 is the constant-only model)."""

    ordered_terms: list[MultiIndex]
    loocv_per_step: list[float]
    chosen_prefix_length: int
    p_chosen: int
    scheme: str = ""
    fell_back_to_ok: bool = False

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "p_chosen": self.p_chosen,
            "chosen_prefix_length": self.chosen_prefix_length,
            "ordered_terms": [list(t) for t in self.ordered_terms],
            "loocv_per_step": [float(v) for v in self.loocv_per_step],
            "fell_back_to_ok": self.fell_back_to_ok,
        }


@dataclass
class BkPosterior:
    """Posterior coefficient summary for a batch of candidate terms."""

    beta_hat: np.ndarray
    K_diag: np.ndarray
    tau2_over_sigma2: float = 1.0
    var_beta_diag: np.ndarray | None = None


def bk_k_factors(theta):
    """Per-dimension prior weights for linear and quadratic effects.

    With the product Gaussian correlation r_j(h) = exp(-theta'_j h^2)
    evaluated at lags 1 and 2 of the [1,3]-coded axis:
    k_l = (3 - 3 r(2)) / (3 + 4 r(1) + 2 r(2)) and
    k_q = (3 - 4 r(1) + r(2)) / (3 + 4 r(1) + 2 r(2)).
    """
    th = np.asarray(getattr(theta, "theta", theta), dtype=float)
    th_coded = th * BK_DISTANCE_SCALE
    r1 = np.exp(-th_coded)
    r2 = np.exp(-4.0 * th_coded)
    denom = 3.0 + 4.0 * r1 + 2.0 * r2
    k_l = (3.0 - 3.0 * r2) / denom
    k_q = (3.0 - 4.0 * r1 + r2) / denom
    return k_l, k_q


def _bk_columns(points_norm, indices):
    """Coded candidate columns: products of per-factor linear/quadratic codes."""
    x_l, x_q = bk_encode(to_encoding_domain(points_norm))
    n = points_norm.shape[0]
    cols = np.ones((n, len(indices)))
    for i, idx in enumerate(indices):
        for j, d in enumerate(idx):
            if d == 1:
                cols[:, i] *= x_l[:, j]
            elif d == 2:
                cols[:, i] *= x_q[:, j]
            elif d != 0:
                raise ValueError(f"candidate {idx} is not a linear/quadratic effect")
    return cols


def _k_diag(indices, k_l, k_q):
    K = np.ones(len(indices))
    for i, idx in enumerate(indices):
        for j, d in enumerate(idx):
            if d == 1:
                K[i] *= k_l[j]
            elif d == 2:
                K[i] *= k_q[j]
    return K


def bk_posterior_beta(model: KrigingModel, candidate_indices) -> BkPosterior:
    """Posterior means of candidate-term coefficients given the current fit.

    beta_hat = (tau^2/sigma^2) K Mc' R^-1 (y - F alpha) with tau^2/sigma^2
    fixed at 1 (the ranking by |beta_hat| is invariant to that scale).
    """
    k_l, k_q = bk_k_factors(model.theta)
    K = _k_diag(candidate_indices, k_l, k_q)
    Mc = _bk_columns(model.design.points, candidate_indices)
    beta = K * (Mc.T @ model._w)
    # exact posterior variance diag, exposed for the trace only
    V = solve_triangular(model.chol, Mc, lower=True)
    a_diag = np.sum(V * V, axis=0)
    var_diag = model.sigma2 * (K - K * a_diag * K)
    return BkPosterior(beta_hat=beta, K_diag=K, tau2_over_sigma2=1.0, var_beta_diag=var_diag)


def _max_selected_terms(n: int) -> int:
    # keep P = 1 + k small enough for leave-one-out (P <= n - 2)
    return max(0, n - 3)


def _fit_prefix(design, family, terms, strategy, state, *, first=False, final=False):
    m = design.dimension
    indices = ((0,) * m,) + tuple(terms)
    index_set = MultiIndexSet(indices, IndexScheme.TOTAL_ORDER, max((sum(t) for t in indices), default=0))
    basis = BasisSpec(family, index_set)
    theta = tune_for_stage(design, basis, strategy, state, first=first, final=final)
    model = fit(design, basis, theta)
    model._loocv = loocv_rmse(model)
    return model


def _repolish(design, family, terms, strategy, state, scan_model):
    """GA+BFGS re-polish of the selected trend; kept only if the LOOCV
    does not regress past the scan winner."""
    if strategy.kind.value != "simplified":
        return scan_model
    try:
        polished = _fit_prefix(design, family, terms, strategy, state, final=True)
    except KrigingError:
        return scan_model
    return polished if polished._loocv <= scan_model._loocv else scan_model


def _argmin_prefix(loocvs) -> int:
    best = 0
    for k in range(1, len(loocvs)):
        if loocvs[k] < loocvs[best]:
            best = k
    return best


def build_bk(design: ExperimentalDesign, p_range, strategy: TuneStrategy, state: TuneState | None = None):
    """Bayesian forward selection over the two-factor candidate set.

    Returns (model, trace). Falls back to the constant-trend model with a
    warning flag when no candidate model can be fitted.
    """
    state = state if state is not None else TuneState()
    m = design.dimension
    valid_p = sorted({int(p) for p in p_range if int(p) >= 2})
    if not valid_p:
        raise ValueError("blind-Kriging scan needs at least one p >= 2 in p_range")
    # the two-factor candidate set does not grow with p; one scan suffices
    p_eff = valid_p[0]
    candidates = list(generate_index_set(m, 2, IndexScheme.TWO_FACTOR).indices[1:])

    first = state.last_optimum_log_theta is None
    ok_model = _fit_prefix(design, PolyFamily.MONIC, (), strategy, state, first=first)
    models = [ok_model]
    loocvs = [ok_model._loocv]
    selected: list[MultiIndex] = []
    remaining = list(candidates)
    increases = 0
    had_fit_failure = False

    while remaining and len(selected) < _max_selected_terms(design.n):
        posterior = bk_posterior_beta(models[-1], remaining)
        magnitude = np.abs(posterior.beta_hat)
        if not np.any(magnitude > 0.0):
            break  # zero residual: nothing left to explain
        order = np.argsort(-magnitude, kind="stable")
        model = None
        for pos in order:
            term = remaining[pos]
            try:
                model = _fit_prefix(design, PolyFamily.MONIC, selected + [term], strategy, state)
            except KrigingError:
                had_fit_failure = True
                continue
            remaining.pop(pos)
            selected.append(term)
            break
        if model is None:
            break
        models.append(model)
        loocvs.append(model._loocv)
        increases = increases + 1 if loocvs[-1] > loocvs[-2] else 0
        if increases >= _EARLY_STOP_RUN:
            break

    chosen = _argmin_prefix(loocvs)
    fell_back = chosen == 0 and had_fit_failure and len(models) == 1
    chosen_model = models[chosen]
    chosen_model = _repolish(design, PolyFamily.MONIC, selected[:chosen], strategy, state, chosen_model)
    trace = SelectionTrace(
        ordered_terms=list(selected),
        loocv_per_step=[float(v) for v in loocvs],
        chosen_prefix_length=chosen,
        p_chosen=p_eff,
        scheme=IndexScheme.TWO_FACTOR.value,
        fell_back_to_ok=fell_back,
    )
    if fell_back:
        log.warning("forward selection could not fit any candidate model; using the constant trend")
    return chosen_model, trace


def lars_select(columns, y, max_steps=None, tol=1e-10):
    """Least-angle-regression ordering of standardized candidate columns.

    Classic equiangular forward selection: start from a zero coefficient
    vector and residual y, repeatedly admit the predictor most correlated
    with the residual and advance along the joint equiangular direction
    until another predictor ties. Returns the admission order (column
    indices); runs at most min(P, n-1) steps.
    """
    X = np.asarray(columns, dtype=float)
    y = np.asarray(y, dtype=float)
    n, P = X.shape
    if max_steps is None:
        max_steps = min(P, n - 1)
    scale = max(1.0, float(np.linalg.norm(y)))
    active: list[int] = []
    inactive = list(range(P))
    r = y.copy()
    for _ in range(max_steps):
        if not inactive:
            break
        c = X.T @ r
        pos = int(np.argmax(np.abs(c[inactive])))
        j = inactive[pos]
        C = abs(float(c[j]))
        if C <= tol * scale:
            break
        active.append(j)
        inactive.pop(pos)
        XA = X[:, active]
        s = np.sign(c[active])
        G = XA.T @ XA
        try:
            u0 = np.linalg.solve(G, s)
        except np.linalg.LinAlgError:
            active.pop()
            break
        denom = float(s @ u0)
        if denom <= 0.0:
            active.pop()
            break
        A = 1.0 / np.sqrt(denom)
        w = A * u0
        u = XA @ w
        a = X.T @ u
        if inactive:
            gammas = []
            for k in inactive:
                for g in ((C - c[k]) / (A - a[k]), (C + c[k]) / (A + a[k])):
                    if np.isfinite(g) and g > 1e-14:
                        gammas.append(float(g))
            gamma = min(gammas) if gammas else C / A
        else:
            gamma = C / A
        r = r - gamma * u
    return active


def _standardized_columns(design, dictionary, family):
    """Centered unit-norm basis columns for the non-constant terms.

    Returns (terms, columns); zero-variance columns are dropped with a
    notice since correlation-based ranking cannot use them.
    """
    terms = list(dictionary.indices[1:])
    if not terms:
        return [], np.empty((design.n, 0))
    spec = BasisSpec(family, dictionary)
    F = eval_basis(spec, design.points)[:, 1:]
    Xc = F - F.mean(axis=0)
    norms = np.linalg.norm(Xc, axis=0)
    keep = norms > 1e-12 * max(1.0, float(np.abs(F).max()))
    if not np.all(keep):
        dropped = [terms[i] for i in np.nonzero(~keep)[0]]
        log.info("dropping %d zero-variance candidate columns: %s", len(dropped), dropped)
    terms = [t for t, k in zip(terms, keep) if k]
    Xc = Xc[:, keep] / norms[keep]
    return terms, Xc


def _scan_ordered_terms(design, family, ordered_terms, strategy, state, ok_model):
    """Refit the surrogate at each prefix of an ordered term list."""
    models = [ok_model]
    loocvs = [ok_model._loocv]
    kept: list[MultiIndex] = []
    increases = 0
    for term in ordered_terms:
        if len(kept) >= _max_selected_terms(design.n):
            break
        try:
            model = _fit_prefix(design, family, kept + [term], strategy, state)
        except KrigingError:
            continue
        kept.append(term)
        models.append(model)
        loocvs.append(model._loocv)
        increases = increases + 1 if loocvs[-1] > loocvs[-2] else 0
        if increases >= _EARLY_STOP_RUN:
            break
    return models, loocvs, kept


def build_pck(
    design: ExperimentalDesign,
    p_range,
    scheme,
    strategy: TuneStrategy,
    state: TuneState | None = None,
):
    """Least-angle-regression construction over a Legendre dictionary.

    For each order p, the dictionary's standardized columns are ordered by
    LARS against the standardized responses, and a full surrogate is
    refitted at every prefix; the lowest-LOOCV model across all p wins.
    Returns (model, trace).
    """
    state = state if state is not None else TuneState()
    scheme = IndexScheme(scheme)
    m = design.dimension
    p_values = sorted({int(p) for p in p_range})
    if scheme is IndexScheme.TWO_FACTOR:
        p_values = [p for p in p_values if p >= 2][:1]  # set does not grow with p
    if not p_values:
        raise ValueError("no valid p values for this scheme")

    first = state.last_optimum_log_theta is None
    ok_model = _fit_prefix(design, PolyFamily.LEGENDRE, (), strategy, state, first=first)
    anchor = None if state.last_optimum_log_theta is None else state.last_optimum_log_theta.copy()

    best = None  # (loocv, p, models, loocvs, kept, chosen)
    for p in p_values:
        # each order's scan warm-starts from the constant-trend optimum;
        # small trends resemble it far more than the previous scan's end
        if anchor is not None:
            state.reset_scan(anchor)
        dictionary = generate_index_set(m, p, scheme)
        terms, Xc = _standardized_columns(design, dictionary, PolyFamily.LEGENDRE)
        order = lars_select(Xc, design.responses_std) if terms else []
        ordered_terms = [terms[i] for i in order]
        models, loocvs, kept = _scan_ordered_terms(
            design, PolyFamily.LEGENDRE, ordered_terms, strategy, state, ok_model
        )
        chosen = _argmin_prefix(loocvs)
        if best is None or loocvs[chosen] < best[0]:
            best = (loocvs[chosen], p, models, loocvs, kept, chosen)

    _, p_best, models, loocvs, kept, chosen = best
    chosen_model = models[chosen]
    chosen_model = _repolish(design, PolyFamily.LEGENDRE, kept[:chosen], strategy, state, chosen_model)
    trace = SelectionTrace(
        ordered_terms=list(kept),
        loocv_per_step=[float(v) for v in loocvs],
        chosen_prefix_length=chosen,
        p_chosen=p_best,
        scheme=scheme.value,
    )
    return chosen_model, trace


def build_uk_frequentist(
    design: ExperimentalDesign,
    p: int,
    strategy: TuneStrategy,
    state: TuneState | None = None,
):
    """Rank a fixed total-order Legendre dictionary by GLS coefficient
    magnitude (on standardized columns), then pick the lowest-LOOCV prefix.

    Requires the dictionary to be smaller than the sample count. Returns
    (model, trace).
    """
    state = state if state is not None else TuneState()
    m = design.dimension
    dictionary = generate_index_set(m, p, IndexScheme.TOTAL_ORDER)
    if dictionary.cardinality >= design.n:
        raise SingularTrendError(
            f"frequentist ranking needs fewer trend terms ({dictionary.cardinality}) than samples ({design.n})"
        )
    first = state.last_optimum_log_theta is None
    full_basis = BasisSpec(PolyFamily.LEGENDRE, dictionary)
    theta_full = tune_for_stage(design, full_basis, strategy, state, first=first)
    full_model = fit(design, full_basis, theta_full)

    terms, Xc = _standardized_columns(design, dictionary, PolyFamily.LEGENDRE)
    Fc = np.hstack([np.ones((design.n, 1)), Xc])
    coef, _, _ = gls_coefficients(Fc, full_model.chol, design.responses_std)
    order = np.argsort(-np.abs(coef[1:]), kind="stable")
    ordered_terms = [terms[i] for i in order]

    ok_model = _fit_prefix(design, PolyFamily.LEGENDRE, (), strategy, state)
    models, loocvs, kept = _scan_ordered_terms(
        design, PolyFamily.LEGENDRE, ordered_terms, strategy, state, ok_model
    )
    chosen = _argmin_prefix(loocvs)
    chosen_model = models[chosen]
    chosen_model = _repolish(design, PolyFamily.LEGENDRE, kept[:chosen], strategy, state, chosen_model)
    trace = SelectionTrace(
        ordered_terms=list(kept),
        loocv_per_step=[float(v) for v in loocvs],
        chosen_prefix_length=chosen,
        p_chosen=p,
        scheme="coefficient-magnitude",
    )
    return chosen_model, trace


def build_uk_fixed(
    design: ExperimentalDesign,
    p: int,
    strategy: TuneStrategy,
    state: TuneState | None = None,
) -> KrigingModel:
    """Surrogate with the complete total-order Legendre basis of order p."""
    state = state if state is not None else TuneState()
    dictionary = generate_index_set(design.dimension, p, IndexScheme.TOTAL_ORDER)
    if dictionary.cardinality > design.n:
        raise SingularTrendError(
            f"fixed trend of order {p} has {dictionary.cardinality} terms "
            f"but only {design.n} samples are available"
        )
    basis = BasisSpec(PolyFamily.LEGENDRE, dictionary)
    first = state.last_optimum_log_theta is None
    theta = tune_for_stage(design, basis, strategy, state, first=first)
    return fit(design, basis, theta)
