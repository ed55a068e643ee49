import math

import numpy as np
import pytest

from oracles import grid_oracle
from sparselogit.errors import ContractViolation, DegenerateModelError, NonConvergenceError
from sparselogit.mle_irls import IrlsConfig, criterion_value, fit_restricted_mle, is_separated
from sparselogit.model_core import LOGISTIC, GlmFamily, inv_logit, log_likelihood


def random_instance(rng, n, k):
    X = rng.uniform(-1, 1, (n, k))
    y = (rng.random(n) < inv_logit(X @ rng.normal(0, 1, k))).astype(float)
    return X, y


class TestClosedForms:
    def test_constant_column(self):
        X = np.ones((8, 1))
        y = np.array([1, 1, 1, 1, 1, 1, 0, 0], dtype=float)
        fit = fit_restricted_mle(LOGISTIC, X, y)
        assert fit.beta[0] == pytest.approx(math.log(3), abs=1e-10)
        assert fit.converged

    def test_empty_model(self):
        X = np.random.default_rng(0).standard_normal((9, 3))
        y = np.array([0, 1] * 4 + [1], dtype=float)
        fit = fit_restricted_mle(LOGISTIC, X, y, ())
        np.testing.assert_array_equal(fit.beta, 0.0)
        assert fit.objective == pytest.approx(9 * math.log(2))
        assert log_likelihood(LOGISTIC, X, fit.beta, y) == pytest.approx(-9 * math.log(2))


class TestGridOracle:
    def test_two_dim_instance_matches_grid_beta(self):
        rng = np.random.default_rng(11)
        done = 0
        while done < 10:
            X, y = random_instance(rng, 6, 2)
            if is_separated(X, y):
                continue
            fit = fit_restricted_mle(LOGISTIC, X, y)
            b, _ = grid_oracle(X, y, half_width=12.0)
            if np.max(np.abs(b)) > 11.0:
                continue  # optimum outside the search box
            np.testing.assert_allclose(fit.beta, b, atol=1e-2)
            done += 1

    def test_likelihood_dominates_grid(self):
        rng = np.random.default_rng(12)
        for _ in range(60):
            n = int(rng.integers(4, 13))
            k = int(rng.integers(1, 3))
            X, y = random_instance(rng, n, k)
            fit = fit_restricted_mle(LOGISTIC, X, y)
            _, best = grid_oracle(X, y)
            assert log_likelihood(LOGISTIC, X, fit.beta, y) >= best - 1e-6


class TestSeparation:
    def test_canonical_instance(self):
        X = np.array([[-1.0], [-2.0], [1.0], [2.0]])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        fit = fit_restricted_mle(LOGISTIC, X, y, (0,))
        assert fit.diagnostics.separation_detected
        assert not fit.converged

    def test_norm_rule_fires(self):
        X = np.array([[-1.0], [-2.0], [1.0], [2.0]])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        fit = fit_restricted_mle(LOGISTIC, X, y, cfg=IrlsConfig(grad_tol=1e-300, separation_norm=5.0))
        assert fit.diagnostics.separation_detected
        assert np.linalg.norm(fit.beta) > 5.0

    def test_box_makes_boundary_active(self):
        X = np.array([[-1.0], [-2.0], [1.0], [2.0]])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        fit = fit_restricted_mle(LOGISTIC, X, y, cfg=IrlsConfig(box_C0=3.0))
        assert fit.diagnostics.boundary_active
        assert fit.diagnostics.separation_detected
        assert np.max(np.abs(X @ fit.beta)) == pytest.approx(3.0)

    def test_lp_detector(self):
        assert is_separated(np.array([[1.0], [-1.0]]), np.array([1.0, 0.0]))
        assert not is_separated(np.array([[1.0], [1.0]]), np.array([1.0, 0.0]))


class TestErrors:
    def test_rank_deficient(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal(10)
        X = np.column_stack([a, 2 * a])
        y = (rng.random(10) < 0.5).astype(float)
        with pytest.raises(DegenerateModelError):
            fit_restricted_mle(LOGISTIC, X, y)

    def test_nonconvergence_carries_fit(self):
        rng = np.random.default_rng(1)
        X, y = random_instance(rng, 50, 3)
        with pytest.raises(NonConvergenceError) as info:
            fit_restricted_mle(LOGISTIC, X, y, cfg=IrlsConfig(max_iter=1))
        assert info.value.fit is not None
        assert info.value.diagnostics.iterations == 1

    def test_bad_model_indices(self):
        with pytest.raises(ContractViolation):
            fit_restricted_mle(LOGISTIC, np.ones((3, 2)), np.array([0.0, 1.0, 1.0]), (2,))

    def test_non_binary(self):
        with pytest.raises(ContractViolation):
            fit_restricted_mle(LOGISTIC, np.ones((2, 1)), np.array([0.5, 1.0]))

    def test_config_validation(self):
        with pytest.raises(ContractViolation):
            IrlsConfig(max_iter=0)
        with pytest.raises(ContractViolation):
            IrlsConfig(grad_tol=0.0)


class TestInvariants:
    def test_ascent_score_and_support(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            X, y = random_instance(rng, 40, 6)
            M = tuple(sorted(rng.choice(6, size=3, replace=False)))
            fit = fit_restricted_mle(LOGISTIC, X, y, M)
            trace = fit.diagnostics.loglik_trace
            assert np.all(np.diff(trace) >= 0)
            off = [j for j in range(6) if j not in M]
            assert np.all(fit.beta[off] == 0.0)
            if fit.converged:
                score = X[:, M].T @ (y - inv_logit(X @ fit.beta))
                assert np.max(np.abs(score)) <= 1e-8

    def test_gaussian_family_is_least_squares(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((30, 3))
        y = X @ np.array([1.0, -2.0, 0.5]) + 0.1 * rng.standard_normal(30)
        fit = fit_restricted_mle(GlmFamily.gaussian(), X, y)
        np.testing.assert_allclose(fit.beta, np.linalg.lstsq(X, y, rcond=None)[0], atol=1e-10)


class TestCriterion:
    def test_null(self):
        X = np.ones((5, 1))
        y = np.array([0, 1, 0, 1, 1], dtype=float)
        fit = fit_restricted_mle(LOGISTIC, X, y, ())
        assert criterion_value(LOGISTIC, X, y, fit, 0.0) == pytest.approx(5 * math.log(2))

    def test_additive_and_recomputation(self):
        rng = np.random.default_rng(4)
        X, y = random_instance(rng, 20, 2)
        fit = fit_restricted_mle(LOGISTIC, X, y)
        c1 = criterion_value(LOGISTIC, X, y, fit, 1.5)
        c2 = criterion_value(LOGISTIC, X, y, fit, 4.0)
        assert c2 - c1 == pytest.approx(2.5, abs=1e-12)
        assert c1 == pytest.approx(-log_likelihood(LOGISTIC, X, fit.beta, y) + 1.5, abs=1e-12)
        assert fit.objective == pytest.approx(-log_likelihood(LOGISTIC, X, fit.beta, y), abs=1e-12)
