import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_design
from oracles import OkClosedForm, naive_loocv

from krigego.kriging import (
    NUGGET_INITIAL,
    DegenerateResponseError,
    ExperimentalDesign,
    Hyperparameters,
    IllConditionedError,
    SingularTrendError,
    build_corr_matrix,
    concentrated_log_likelihood,
    denormalize_point,
    fit,
    gauss_corr,
    gls_coefficients,
    loocv_rmse,
    normalize_point,
    predict,
    predict_mse,
    sigma2_hat,
    standardize_outputs,
)
from krigego.polybasis import BasisSpec, IndexScheme, PolyFamily, generate_index_set


def legendre_basis(m, p):
    return BasisSpec(PolyFamily.LEGENDRE, generate_index_set(m, p, IndexScheme.TOTAL_ORDER))


class TestGaussCorr:
    def test_zero_distance(self, rng):
        x = rng.uniform(-1, 1, 4)
        assert gauss_corr(x, x, np.ones(4)) == 1.0

    def test_unit_case(self):
        assert gauss_corr(np.array([0.0]), np.array([1.0]), np.array([1.0])) == pytest.approx(
            math.exp(-1.0)
        )

    def test_bound_case(self):
        v = gauss_corr(np.array([0.0]), np.array([1.0]), np.array([1e3]))
        assert v == pytest.approx(0.0, abs=1e-300)

    @given(st.integers(1, 5), st.integers(0, 10**6))
    @settings(max_examples=50, deadline=None)
    def test_symmetric_and_bounded(self, m, seed):
        r = np.random.default_rng(seed)
        a, b = r.uniform(-1, 1, m), r.uniform(-1, 1, m)
        th = 10.0 ** r.uniform(-3, 3, m)
        v = gauss_corr(a, b, th)
        assert 0.0 <= v <= 1.0
        assert v == gauss_corr(b, a, th)


class TestCorrelationMatrix:
    def test_single_point(self):
        L, nug = build_corr_matrix(np.array([[0.3, 0.4]]), np.array([1.0, 1.0]), nugget=1e-10)
        assert L.shape == (1, 1)
        assert L[0, 0] ** 2 == pytest.approx(1.0 + 1e-10)

    def test_large_theta_identity(self, rng):
        pts = rng.uniform(-1, 1, (6, 2))
        L, _ = build_corr_matrix(pts, np.array([1e3, 1e3]))
        R = L @ L.T
        np.testing.assert_allclose(R, np.eye(6), atol=1e-6)

    def test_matches_elementwise_oracle(self, rng):
        pts = rng.uniform(-1, 1, (3, 2))
        th = np.array([1.0, 1.0])
        L, nug = build_corr_matrix(pts, th, nugget=0.0)
        R = L @ L.T
        for i in range(3):
            for j in range(3):
                expected = gauss_corr(pts[i], pts[j], th) + (nug if i == j else 0.0)
                assert R[i, j] == pytest.approx(expected, abs=1e-12)

    def test_escalation_recovers_singular_input(self):
        # exact duplicates make R singular at zero nugget; the ladder
        # escalates until the factorization goes through
        pts = np.array([[0.0, 0.0], [0.0, 0.0], [0.5, 0.5]])
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
        R = np.exp(-d2)
        assert np.linalg.matrix_rank(R) == 2  # genuinely singular
        L, nug = build_corr_matrix(pts, np.array([1.0, 1.0]), nugget=0.0)
        assert nug > 0.0
        np.testing.assert_allclose(L @ L.T, R + nug * np.eye(3), atol=1e-12)

    def test_ladder_exhaustion_raises(self, monkeypatch):
        calls = []

        def always_fail(_):
            calls.append(1)
            raise np.linalg.LinAlgError("not positive definite")

        monkeypatch.setattr(np.linalg, "cholesky", always_fail)
        pts = np.array([[0.0, 0.0], [0.5, 0.5]])
        with pytest.raises(IllConditionedError) as err:
            build_corr_matrix(pts, np.array([1.0, 1.0]))
        assert err.value.nugget >= 1e-6 * 0.999
        assert len(calls) > 1  # the ladder actually escalated


class TestGls:
    def test_identity_mean(self, rng):
        y = rng.normal(size=7)
        F = np.ones((7, 1))
        alpha, _, _ = gls_coefficients(F, np.eye(7), y)
        assert alpha[0] == pytest.approx(np.mean(y), rel=1e-12)

    def test_identity_reduces_to_ols(self, rng):
        F = rng.normal(size=(9, 3))
        y = rng.normal(size=9)
        alpha, _, _ = gls_coefficients(F, np.eye(9), y)
        expected = np.linalg.lstsq(F, y, rcond=None)[0]
        np.testing.assert_allclose(alpha, expected, atol=1e-10)

    def test_matches_dense_inverse_oracle(self, rng):
        n, P = 5, 2
        pts = rng.uniform(-1, 1, (n, 1))
        L, _ = build_corr_matrix(pts, np.array([2.0]))
        R = L @ L.T
        F = np.column_stack([np.ones(n), pts[:, 0]])
        y = rng.normal(size=n)
        alpha, _, _ = gls_coefficients(F, L, y)
        Ri = np.linalg.inv(R)
        expected = np.linalg.inv(F.T @ Ri @ F) @ F.T @ Ri @ y
        np.testing.assert_allclose(alpha, expected, atol=1e-10)

    def test_rank_deficient(self):
        F = np.column_stack([np.ones(5), np.ones(5)])
        with pytest.raises(SingularTrendError):
            gls_coefficients(F, np.eye(5), np.arange(5.0))


class TestSigma2:
    def test_zero_residual(self):
        F = np.ones((4, 1))
        y = 2.5 * np.ones(4)
        alpha = np.array([2.5])
        assert sigma2_hat(F, np.eye(4), y, alpha) == 0.0

    def test_pm_one(self):
        F = np.ones((2, 1))
        y = np.array([-1.0, 1.0])
        alpha = np.array([0.0])
        assert sigma2_hat(F, np.eye(2), y, alpha) == pytest.approx(1.0)

    def test_matches_dense_oracle(self, rng):
        n = 6
        pts = rng.uniform(-1, 1, (n, 2))
        L, _ = build_corr_matrix(pts, np.array([1.5, 0.5]))
        R = L @ L.T
        F = np.column_stack([np.ones(n), pts])
        y = rng.normal(size=n)
        alpha, _, _ = gls_coefficients(F, L, y)
        e = y - F @ alpha
        expected = e @ np.linalg.inv(R) @ e / n
        assert sigma2_hat(F, L, y, alpha) == pytest.approx(expected, rel=1e-10)


class TestStandardize:
    def test_two_points(self):
        y_std, mu, sd = standardize_outputs([0.0, 2.0])
        np.testing.assert_allclose(y_std, [-1.0, 1.0])
        assert (mu, sd) == (1.0, 1.0)

    def test_three_points(self):
        y_std, _, _ = standardize_outputs([1.0, 2.0, 3.0])
        np.testing.assert_allclose(y_std, [-math.sqrt(1.5), 0.0, math.sqrt(1.5)])

    def test_constant_rejected(self):
        with pytest.raises(DegenerateResponseError):
            standardize_outputs([3.0, 3.0, 3.0])

    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=20))
    @settings(max_examples=60, deadline=None)
    def test_population_moments(self, ys):
        arr = np.asarray(ys)
        if np.std(arr) <= 1e-12:
            return
        y_std, _, _ = standardize_outputs(arr)
        assert float(np.mean(y_std)) == pytest.approx(0.0, abs=1e-9)
        assert float(np.std(y_std)) == pytest.approx(1.0, rel=1e-9)


class TestNormalization:
    BOUNDS = np.array([[0.05, 0.15], [-4.0, 8.0]])

    def test_midpoint_and_edges(self):
        np.testing.assert_allclose(normalize_point([0.10, 2.0], self.BOUNDS), [0.0, 0.0], atol=1e-14)
        np.testing.assert_allclose(normalize_point([0.05, -4.0], self.BOUNDS), [-1.0, -1.0], atol=1e-14)

    @given(st.floats(0.05, 0.15), st.floats(-4.0, 8.0))
    @settings(max_examples=80, deadline=None)
    def test_round_trip(self, a, b):
        x = np.array([a, b])
        back = denormalize_point(normalize_point(x, self.BOUNDS), self.BOUNDS)
        np.testing.assert_allclose(back, x, atol=1e-12)

    def test_out_of_bounds(self):
        with pytest.raises(ValueError):
            normalize_point([0.2, 0.0], self.BOUNDS)
        with pytest.raises(ValueError):
            denormalize_point([1.5, 0.0], self.BOUNDS)


class TestFitPredict:
    def test_interpolation(self, rng):
        design = make_design(20, 2, seed=3)
        model = fit(design, legendre_basis(2, 1), Hyperparameters(np.array([8.0, 8.0])))
        for i in range(design.n):
            scale = design.std_y + abs(design.responses_raw[i])
            assert abs(predict(model, design.points[i]) - design.responses_raw[i]) <= 1e-8 * scale
            assert predict_mse(model, design.points[i]) <= 1e-8 * design.std_y**2

    def test_prior_reversion_far_away(self):
        pts = np.array([[-0.9, -0.9], [0.9, 0.9], [-0.9, 0.9], [0.9, -0.9]])
        y = np.array([1.0, 2.0, 3.0, 4.0])
        design = ExperimentalDesign.from_normalized(pts, np.tile([0.0, 1.0], (2, 1)), y)
        model = fit(design, legendre_basis(2, 0), Hyperparameters(np.array([1e3, 1e3])))
        assert predict(model, np.array([0.0, 0.0])) == pytest.approx(design.mean_y, rel=1e-6)
        expected_mse = model.sigma2 * (1.0 + 1.0 / design.n) * design.std_y**2
        assert predict_mse(model, np.array([0.0, 0.0])) == pytest.approx(expected_mse, rel=1e-5)

    def test_predictor_matches_dense_oracle(self, rng):
        design = make_design(8, 1, seed=5)
        basis = legendre_basis(1, 1)
        theta = Hyperparameters(np.array([3.0]))
        model = fit(design, basis, theta)
        R = model.chol @ model.chol.T
        Ri = np.linalg.inv(R)
        F = model.F
        y = design.responses_std
        alpha = np.linalg.inv(F.T @ Ri @ F) @ F.T @ Ri @ y
        for x in rng.uniform(-1, 1, (5, 1)):
            r = np.exp(-3.0 * (design.points[:, 0] - x[0]) ** 2)
            psi = np.array([1.0, x[0]])
            f_std = psi @ alpha + r @ Ri @ (y - F @ alpha)
            expected = design.mean_y + design.std_y * f_std
            assert predict(model, x) == pytest.approx(expected, rel=1e-9)

    def test_mse_matches_dense_oracle(self, rng):
        design = make_design(10, 2, seed=6)
        basis = legendre_basis(2, 1)
        theta = Hyperparameters(np.array([2.0, 4.0]))
        model = fit(design, basis, theta)
        R = model.chol @ model.chol.T
        Ri = np.linalg.inv(R)
        F = model.F
        for x in rng.uniform(-1, 1, (6, 2)):
            r = np.exp(-((design.points - x) ** 2 @ np.array([2.0, 4.0])))
            psi = np.array([1.0, x[1], x[0]])  # graded-lex: (0,1) before (1,0)
            u = F.T @ Ri @ r - psi
            mse_std = model.sigma2 * (
                1.0 - r @ Ri @ r + u @ np.linalg.inv(F.T @ Ri @ F) @ u
            )
            expected = max(mse_std, 0.0) * design.std_y**2
            assert predict_mse(model, x) == pytest.approx(expected, rel=1e-8, abs=1e-12)

    def test_ok_equals_constant_uk(self, rng):
        for seed in range(10):
            design = make_design(12, 2, seed=seed)
            theta = Hyperparameters(10.0 ** rng.uniform(-1, 2, 2))
            model = fit(design, legendre_basis(2, 0), theta)
            oracle = OkClosedForm(design, theta, model.nugget)
            for x in rng.uniform(-1, 1, (8, 2)):
                assert predict(model, x) == pytest.approx(oracle.predict(x), abs=1e-10 * design.std_y)
                assert predict_mse(model, x) == pytest.approx(
                    oracle.predict_mse(x), rel=1e-8, abs=1e-10 * design.std_y**2
                )

    def test_mse_nonnegative_and_preclamp_bounded(self):
        # dense 1-D sweep: the exact expression may dip below zero only at
        # rounding level near design points
        design = make_design(9, 1, seed=17)
        theta = Hyperparameters(np.array([20.0]))
        model = fit(design, legendre_basis(1, 1), theta)
        R = model.chol @ model.chol.T
        Ri = np.linalg.inv(R)
        F = model.F
        FtRiF_inv = np.linalg.inv(F.T @ Ri @ F)
        for xv in np.linspace(-1, 1, 2001):
            x = np.array([xv])
            assert predict_mse(model, x) >= 0.0
            r = np.exp(-20.0 * (design.points[:, 0] - xv) ** 2)
            psi = np.array([1.0, xv])
            u = F.T @ Ri @ r - psi
            pre_clamp = model.sigma2 * (1.0 - r @ Ri @ r + u @ FtRiF_inv @ u)
            assert pre_clamp >= -1e-8 * model.sigma2

    def test_saturated_trend_degenerate(self):
        pts = np.array([[-0.8], [-0.1], [0.4], [0.9]])
        y = np.array([0.1, 0.4, -0.2, 0.6])
        design = ExperimentalDesign.from_normalized(pts, np.array([[0.0, 1.0]]), y)
        basis = legendre_basis(1, 3)  # P = 4 = n
        model = fit(design, basis, Hyperparameters(np.array([1e3])))
        assert model.degenerate

    def test_too_many_terms_rejected(self):
        design = make_design(4, 1, seed=2)
        with pytest.raises(SingularTrendError):
            fit(design, legendre_basis(1, 4), Hyperparameters(np.array([1.0])))

    def test_describe_keys(self):
        design = make_design(6, 2, seed=9)
        model = fit(design, legendre_basis(2, 0), Hyperparameters(np.array([1.0, 1.0])))
        d = model.describe()
        assert set(d) == {"theta", "alpha", "sigma2", "index_set", "design"}
        assert "points" in d["design"]


class TestLikelihood:
    def test_sentinel_on_collapsed_variance(self):
        # responses exactly in the trend span: sigma2_hat underflows to 0
        pts = np.linspace(-1, 1, 6)[:, None]
        y = 2.0 - 3.0 * pts[:, 0]
        design = ExperimentalDesign.from_normalized(pts, np.array([[0.0, 1.0]]), y)
        val = concentrated_log_likelihood(design, legendre_basis(1, 1), np.array([1.0]))
        assert val == -np.inf

    def test_sentinel_on_factorization_failure(self, monkeypatch):
        def always_fail(_):
            raise np.linalg.LinAlgError("not positive definite")

        design = make_design(5, 2, seed=21)
        monkeypatch.setattr(np.linalg, "cholesky", always_fail)
        val = concentrated_log_likelihood(design, legendre_basis(2, 0), np.array([1.0, 1.0]))
        assert val == -np.inf

    def test_identity_limit(self, rng):
        design = make_design(5, 2, seed=8)
        basis = legendre_basis(2, 0)
        theta = np.array([1e3, 1e3])
        val = concentrated_log_likelihood(design, basis, theta)
        model = fit(design, basis, Hyperparameters(theta))
        # ln|R| ~ 0, so the value collapses to -n ln(sigma2); both sides are
        # within rounding of zero here, so compare absolutely
        assert val == pytest.approx(-design.n * math.log(model.sigma2), abs=1e-8)

    def test_monotone_transform_of_full_likelihood(self, rng):
        # argmax over a theta grid agrees with the exact Gaussian log-likelihood
        design = make_design(5, 1, seed=11)
        basis = legendre_basis(1, 0)
        grid = 10.0 ** np.linspace(-2, 2, 21)
        concentrated = []
        full = []
        for th in grid:
            concentrated.append(concentrated_log_likelihood(design, basis, np.array([th])))
            model = fit(design, basis, Hyperparameters(np.array([th])))
            R = model.chol @ model.chol.T
            y = design.responses_std
            e = y - model.F @ model.alpha
            quad = e @ np.linalg.solve(R, e)
            n = design.n
            s2 = model.sigma2
            ll = -0.5 * (n * math.log(2 * math.pi * s2) + math.log(np.linalg.det(R)) + quad / s2)
            full.append(ll)
        assert int(np.argmax(concentrated)) == int(np.argmax(full))


class TestLoocv:
    def test_matches_naive_refit_ok(self, rng):
        design = make_design(5, 1, seed=13)
        model = fit(design, legendre_basis(1, 0), Hyperparameters(np.array([2.0])))
        assert loocv_rmse(model) == pytest.approx(naive_loocv(model), rel=1e-6)

    def test_matches_naive_refit_uk(self, rng):
        design = make_design(20, 2, seed=14)
        model = fit(design, legendre_basis(2, 1), Hyperparameters(np.array([5.0, 1.0])))
        assert loocv_rmse(model) == pytest.approx(naive_loocv(model), rel=1e-6)

    def test_degenerate_rejected(self):
        design = make_design(5, 1, seed=15)
        model = fit(design, legendre_basis(1, 3), Hyperparameters(np.array([1.0])))
        with pytest.raises(SingularTrendError):
            loocv_rmse(model)

    def test_flat_after_trend(self):
        # responses exactly linear: leave-one-out errors vanish with a linear trend
        pts = np.linspace(-1, 1, 9)[:, None]
        y = 4.0 + 2.5 * pts[:, 0]
        design = ExperimentalDesign.from_normalized(pts, np.array([[0.0, 1.0]]), y)
        model = fit(design, legendre_basis(1, 1), Hyperparameters(np.array([1.0])))
        assert loocv_rmse(model) <= 1e-7 * design.std_y


class TestDesignValidation:
    def test_duplicate_points_rejected(self):
        pts = np.array([[0.1, 0.1], [0.1, 0.1], [0.5, 0.5]])
        with pytest.raises(ValueError):
            ExperimentalDesign.from_normalized(pts, np.tile([0.0, 1.0], (2, 1)), [1.0, 2.0, 3.0])

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            ExperimentalDesign.from_normalized(
                np.array([[0.0, 0.0]]), np.tile([0.0, 1.0], (2, 1)), [1.0]
            )

    def test_out_of_box_rejected(self):
        pts = np.array([[0.0, 1.5], [0.2, 0.3]])
        with pytest.raises(ValueError):
            ExperimentalDesign.from_normalized(pts, np.tile([0.0, 1.0], (2, 1)), [1.0, 2.0])
