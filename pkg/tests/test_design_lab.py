import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparselogit.design_lab import (RandomDesignSpec, WreParams, back_map, build_shatter_matrix_W,
                                    build_worst_case_X0, count_labelings, estimate_kappa_wre, in_cone,
                                    labeling_table, margin_logit, orthogonal_design, proof_kappa,
                                    sample_margin_response, sample_random_design, save_design_csv,
                                    save_response_csv, unit_normalize_columns, verify_shattering)
from sparselogit.errors import ContractViolation, EnumerationGuardError
from sparselogit.experiment.data import load_csv_dataset
from sparselogit.model_core import inv_logit


def block_search_oracle(W, d0):
    """Set of labelings I{W beta >= 0} over all vectors with one +-1 entry per column block."""
    rows, d = W.shape
    m = d // d0
    seen = set()
    for picks in product(range(m), repeat=d0):
        for signs in product((-1.0, 1.0), repeat=d0):
            beta = np.zeros(d)
            for g, (j, s) in enumerate(zip(picks, signs)):
                beta[g * m + j] = s
            seen.add(tuple(int(v) for v in (W @ beta >= 0)))
    return seen


def table_to_set(table):
    rows = int(round(math.log2(table.shape[0])))
    return {tuple((code >> i) & 1 for i in range(rows)) for code in np.flatnonzero(table)}


class TestShatterMatrix:
    def test_d0_1_d_4(self):
        W = build_shatter_matrix_W(1, 4)
        assert W.shape == (3, 4)
        np.testing.assert_array_equal(W[0], 1.0)
        cols = {tuple(c) for c in W.T}
        assert cols == {(1.0, a, b) for a in (1.0, -1.0) for b in (1.0, -1.0)}

    def test_two_blocks(self):
        W = build_shatter_matrix_W(2, 8)
        assert W.shape == (6, 8)
        np.testing.assert_array_equal(W[:3, :4], build_shatter_matrix_W(1, 4))
        np.testing.assert_array_equal(W[3:, 4:], build_shatter_matrix_W(1, 4))
        assert not W[:3, 4:].any() and not W[3:, :4].any()

    @pytest.mark.parametrize("d0,d", [(1, 4), (1, 8), (2, 8), (2, 16), (4, 16), (3, 12)])
    def test_row_structure(self, d0, d):
        W = build_shatter_matrix_W(d0, d)
        k = int(math.log2(2 * d / d0))
        assert W.shape == (d0 * k, d)
        assert np.all(np.count_nonzero(W, axis=1) == 2 ** (k - 1))
        assert set(np.unique(W)) <= {-1.0, 0.0, 1.0}

    def test_bad_dimensions_suggest_nearest(self):
        with pytest.raises(ContractViolation, match="nearest admissible: d0=1, d=4"):
            build_shatter_matrix_W(1, 5)
        with pytest.raises(ContractViolation):
            build_shatter_matrix_W(3, 8)


class TestShattering:
    @pytest.mark.parametrize("d0,d", [(1, 4), (1, 8), (2, 8), (2, 16)])
    def test_constructive_shattering(self, d0, d):
        W = build_shatter_matrix_W(d0, d)
        assert verify_shattering(W, d0)
        assert count_labelings(W, d0) == 2 ** W.shape[0]

    def test_vc_lower_bound_uses_log2(self):
        for d0, d in [(1, 4), (1, 8), (2, 8), (2, 16)]:
            assert build_shatter_matrix_W(d0, d).shape[0] == d0 * math.log2(2 * d / d0)

    def test_duplicated_row(self):
        W = build_shatter_matrix_W(1, 4)
        W = np.vstack([W, W[1]])
        assert not verify_shattering(W, 1)

    def test_random_sign_matrices_match_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            W = rng.choice([-1.0, 1.0], size=(6, 8))
            d0 = int(rng.choice([1, 2]))
            assert table_to_set(labeling_table(W, d0)) == block_search_oracle(W, d0)
            assert verify_shattering(W, d0) == (len(block_search_oracle(W, d0)) == 64)

    def test_guard(self):
        with pytest.raises(EnumerationGuardError):
            verify_shattering(np.ones((21, 2)), 1)


class TestWorstCaseDesign:
    def test_realizability(self):
        rng = np.random.default_rng(1)
        D = build_worst_case_X0(2, 8, 60, 0.3)
        for _ in range(20):
            b = rng.integers(0, 2, D.V)
            p = inv_logit(D.X.entries @ D.beta_for(b))
            want = np.where(D.labels_on_rows(b) == 1, 0.8, 0.2)
            np.testing.assert_allclose(p, want, atol=1e-12)
            theta = D.W @ D.beta_for(b)
            np.testing.assert_allclose(np.abs(theta), math.log(4), atol=1e-12)

    def test_zero_margin(self):
        D = build_worst_case_X0(1, 8, 30, 0.0)
        for _, beta in D.bayes_vectors():
            np.testing.assert_array_equal(inv_logit(D.X.entries @ beta), 0.5)

    def test_row_multiset(self):
        D = build_worst_case_X0(1, 8, 50, 0.1)
        V, kappa = D.V, D.kappa
        assert kappa == 50 // (V - 1)
        counts = np.bincount(D.row_of, minlength=V)
        np.testing.assert_array_equal(counts[:-1], kappa)
        assert counts[-1] == 50 - (V - 1) * kappa
        np.testing.assert_array_equal(D.X.entries, D.W[D.row_of])

    def test_all_vectors_sparse(self):
        D = build_worst_case_X0(2, 8, 40, 0.2)
        for _, beta in D.bayes_vectors():
            assert np.count_nonzero(beta) == 2

    def test_explicit_kappa(self):
        assert build_worst_case_X0(1, 4, 40, 0.2, kappa=3).kappa == 3
        with pytest.raises(ContractViolation):
            build_worst_case_X0(1, 4, 40, 0.2, kappa=100)

    def test_too_few_rows(self):
        with pytest.raises(ContractViolation):
            build_worst_case_X0(2, 16, 5, 0.1)

    def test_margin_logit_and_kappa(self):
        assert margin_logit(0.3) == pytest.approx(math.log(4))
        assert proof_kappa(0.3, 100, 4) == 1
        assert proof_kappa(0.05, 100, 4) == 22
        assert proof_kappa(0.01, 100, 4) == 33
        with pytest.raises(ContractViolation):
            margin_logit(0.5)


class TestNormalization:
    def test_idempotent(self):
        Z, _ = unit_normalize_columns(np.random.default_rng(2).standard_normal((20, 4)))
        Z2, norms = unit_normalize_columns(Z.entries)
        np.testing.assert_allclose(Z2.entries, Z.entries, atol=1e-15)
        np.testing.assert_allclose(norms, 1.0, atol=1e-15)

    def test_ones_column(self):
        Z, norms = unit_normalize_columns(np.ones((4, 1)))
        np.testing.assert_array_equal(Z.entries, 0.5)
        assert norms[0] == 2.0
        assert Z.columns_unit_normalized

    def test_back_map_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            X = rng.standard_normal((15, 5)) * rng.uniform(0.1, 10, 5)
            b = rng.standard_normal(5)
            Z, norms = unit_normalize_columns(X)
            np.testing.assert_allclose(X @ back_map(b, norms), Z.entries @ b, atol=1e-12)

    def test_zero_column(self):
        with pytest.raises(ContractViolation, match="zero column"):
            unit_normalize_columns(np.array([[1.0, 0.0], [2.0, 0.0]]))

    def test_orthogonal_design(self):
        X = orthogonal_design(10, 3)
        G = X.T @ X
        np.testing.assert_array_equal(G - np.diag(np.diag(G)), 0.0)


class TestKappa:
    def test_orthonormal(self):
        Q, _ = np.linalg.qr(np.random.default_rng(4).standard_normal((30, 8)))
        est = estimate_kappa_wre(Q, WreParams(2, 3.0), budget=500)
        assert 1 - 1e-6 <= est.value <= 1 + 1e-12

    def test_duplicated_column(self):
        rng = np.random.default_rng(5)
        X = unit_normalize_columns(rng.standard_normal((30, 6)))[0].entries
        X[:, 5] = X[:, 0]
        u = np.zeros(6)
        u[0], u[5] = 1.0, -1.0
        params = WreParams(1, 3.0)
        assert in_cone(u, params)
        assert estimate_kappa_wre(X, params, budget=200).value <= 1e-3

    def test_bounds_and_membership(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            X = unit_normalize_columns(rng.standard_normal((12, 10)))[0].entries
            params = WreParams(int(rng.integers(1, 4)), float(rng.uniform(1.5, 4)))
            est = estimate_kappa_wre(X, params, budget=300, seed=int(rng.integers(1 << 30)))
            assert est.value >= np.linalg.svd(X, compute_uv=False).min() - 1e-9
            assert in_cone(est.u, params, slack=1e-10)
            assert est.value == pytest.approx(np.linalg.norm(X @ est.u) / np.linalg.norm(est.u), abs=1e-12)
            assert "estimate" in est.note

    def test_cone_scale_invariance(self):
        rng = np.random.default_rng(7)
        params = WreParams(2, 2.0)
        for _ in range(200):
            u = rng.standard_normal(9) * (rng.random(9) < 0.4)
            if u.any():
                assert in_cone(u, params) == in_cone(7.5 * u, params)


class TestRandomDesign:
    def test_rademacher(self):
        X = sample_random_design(RandomDesignSpec("rademacher_rescaled", 4), 50, 0).entries
        np.testing.assert_array_equal(np.abs(X), 0.5)
        np.testing.assert_allclose(np.linalg.norm(X, axis=1), 1.0)

    @pytest.mark.parametrize("dist", ["uniform_ball", "gaussian_rescaled", "rademacher_rescaled"])
    def test_unit_ball_and_second_moment(self, dist):
        X = sample_random_design(RandomDesignSpec(dist, 5), 10_000, 1).entries
        assert np.all(np.linalg.norm(X, axis=1) <= 1 + 1e-12)
        assert np.linalg.eigvalsh(X.T @ X / X.shape[0]).min() > 0.01

    def test_seeded(self):
        spec = RandomDesignSpec("gaussian_rescaled", 6)
        a = sample_random_design(spec, 100, 42).entries
        b = sample_random_design(spec, 100, 42).entries
        assert a.tobytes() == b.tobytes()

    def test_margin_alpha_direction(self):
        u = np.array([1.0, 0.0, 0.0])
        spec = RandomDesignSpec("gaussian_rescaled", 3, margin_alpha=2.0, margin_direction=tuple(u))
        X = sample_random_design(spec, 20_000, 3).entries
        assert np.all(np.linalg.norm(X, axis=1) <= 1 + 1e-12)
        t = np.abs(X @ u)
        # |t| = r U^(1/alpha): P(|t| <= s) = (s / r)^alpha
        r = 1 / math.sqrt(2)
        for s in (0.1, 0.3, 0.5):
            assert np.mean(t <= s) == pytest.approx((s / r) ** 2, abs=0.02)

    def test_unknown(self):
        with pytest.raises(ContractViolation):
            RandomDesignSpec("cauchy", 3)


class TestMarginResponse:
    def test_worst_case_margin(self):
        D = build_worst_case_X0(1, 8, 40, 0.3)
        beta = D.beta_for(np.array([1, 0, 1, 1]))
        ms = sample_margin_response(D.X.entries, beta, 0)
        assert ms.min_margin == pytest.approx(0.3, abs=1e-12)
        assert set(np.unique(ms.y)) <= {0.0, 1.0}

    def test_zero_beta(self):
        ms = sample_margin_response(np.ones((10, 2)), np.zeros(2), 1)
        assert ms.min_margin == 0.0
        np.testing.assert_array_equal(ms.margin_fraction, 1.0)

    def test_empirical_frequency(self):
        X = np.ones((20_000, 1))
        ms = sample_margin_response(X, np.array([math.log(3)]), 2)
        assert ms.y.mean() == pytest.approx(0.75, abs=0.01)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_margin_fraction_nondecreasing(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((50, 3))
    ms = sample_margin_response(X, rng.standard_normal(3), rng)
    assert np.all(np.diff(ms.margin_fraction) >= 0)
    assert ms.margin_fraction[-1] == 1.0


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    X = rng.standard_normal((7, 3))
    y = rng.integers(0, 2, 7)
    save_design_csv(tmp_path / "X.csv", X, ["a", "b", "c"])
    save_response_csv(tmp_path / "y.csv", y)
    D, yy = load_csv_dataset(tmp_path / "X.csv", tmp_path / "y.csv")
    assert D.entries.tobytes() == X.tobytes()
    assert D.feature_names == ("a", "b", "c")
    np.testing.assert_array_equal(yy, y)
