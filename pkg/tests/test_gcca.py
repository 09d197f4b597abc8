"""Multi-view correlation fitting against dense generalized-eigensolver oracles."""

import numpy as np
import pytest
import scipy.linalg

from metaemb.core import (
    EmbeddingView,
    EnsembleBatch,
    InvalidInput,
    NumericalError,
)
from metaemb.gcca import (
    GccaModel,
    apply_gcca,
    covariance_blocks,
    cross_covariance,
    fit_gcca,
)


def batch_of(*matrices):
    return EnsembleBatch(tuple(
        EmbeddingView(f"enc{i}", np.asarray(m, dtype=np.float64))
        for i, m in enumerate(matrices)
    ))


def oracle_blocks(mats, tau):
    """Assemble the regularized block-diagonal and cross-block matrices
    directly from raw data, written independently of the library path."""
    n = mats[0].shape[0]
    centered = [m - m.mean(axis=0) for m in mats]
    dims = [m.shape[1] for m in mats]
    offs = np.concatenate([[0], np.cumsum(dims)])
    total = offs[-1]
    a = np.zeros((total, total))
    b = np.zeros((total, total))
    for j in range(len(mats)):
        for k in range(len(mats)):
            block = centered[j].T @ centered[k] / n
            rows = slice(offs[j], offs[j + 1])
            cols = slice(offs[k], offs[k + 1])
            if j == k:
                a[rows, cols] = block + tau * np.mean(np.diag(block)) * np.eye(dims[j])
            else:
                b[rows, cols] = block
    return a, 0.5 * (b + b.T)


def oracle_whitened_eig(a, b, d):
    """Reference solve: explicit inverse of the Cholesky factor, then a
    plain symmetric eigensolve. Fine for the tiny matrices used here."""
    ell = scipy.linalg.cholesky(a, lower=True)
    inv = np.linalg.inv(ell)
    w, y = scipy.linalg.eigh(inv @ b @ inv.T)
    order = np.argsort(-w, kind="stable")[:d]
    return w[order], inv.T @ y[:, order]


def stacked_eigvecs(model):
    """Rebuild full-length eigenvectors from the per-view projection rows."""
    return np.hstack([theta for theta in model.thetas]).T


class TestCrossCovariance:
    def test_unit_variance_of_centered_pm_one(self):
        b = batch_of([[1.0], [-1.0]])
        np.testing.assert_allclose(cross_covariance(b, 0, 0), [[1.0]], atol=1e-15)

    def test_identical_views_give_equal_blocks(self):
        rng = np.random.default_rng(40)
        m = rng.normal(size=(20, 3))
        b = batch_of(m, m.copy())
        np.testing.assert_allclose(
            cross_covariance(b, 0, 1), cross_covariance(b, 0, 0), atol=1e-14
        )

    def test_independent_views_near_zero(self):
        rng = np.random.default_rng(41)
        b = batch_of(rng.normal(size=(10000, 3)), rng.normal(size=(10000, 2)))
        assert np.abs(cross_covariance(b, 0, 1)).max() < 0.05

    def test_transpose_symmetry(self):
        rng = np.random.default_rng(42)
        b = batch_of(rng.normal(size=(15, 4)), rng.normal(size=(15, 2)))
        np.testing.assert_allclose(
            cross_covariance(b, 0, 1), cross_covariance(b, 1, 0).T, atol=1e-14
        )

    def test_bad_index_rejected(self):
        b = batch_of([[1.0], [2.0]])
        with pytest.raises(InvalidInput):
            cross_covariance(b, 0, 1)


class TestCovarianceBlocks:
    def test_matches_independent_assembly(self):
        rng = np.random.default_rng(43)
        mats = [rng.normal(size=(30, 4)), rng.normal(size=(30, 3)),
                rng.normal(size=(30, 5))]
        a_got, b_got = covariance_blocks(batch_of(*mats), tau=1.0)
        a_want, b_want = oracle_blocks(mats, tau=1.0)
        np.testing.assert_allclose(a_got, a_want, atol=1e-12)
        np.testing.assert_allclose(b_got, b_want, atol=1e-12)


class TestFitGcca:
    def test_identical_views_perfectly_correlated(self):
        b = batch_of([[1.0], [-1.0]], [[1.0], [-1.0]])
        model = fit_gcca(b, d=1, tau=0.0)
        np.testing.assert_allclose(model.eigenvalues, [1.0], atol=1e-8)

    def test_zero_cross_covariance_views_have_zero_spectrum(self):
        # empirical cross-covariance of these two columns is exactly zero
        x = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        y = np.array([[1.0], [1.0], [-1.0], [-1.0]])
        model = fit_gcca(batch_of(x, y), d=2, tau=0.5)
        np.testing.assert_allclose(model.eigenvalues, 0.0, atol=1e-8)

    def test_three_views_match_whitened_oracle(self):
        rng = np.random.default_rng(44)
        mats = [rng.normal(size=(25, 4)) for _ in range(3)]
        model = fit_gcca(batch_of(*mats), d=4, tau=1.0)
        a, b = oracle_blocks(mats, tau=1.0)
        want_vals, want_vecs = oracle_whitened_eig(a, b, 4)
        np.testing.assert_allclose(model.eigenvalues, want_vals, atol=1e-8)
        got_vecs = stacked_eigvecs(model)
        for k in range(4):
            direct = np.abs(got_vecs[:, k] - want_vecs[:, k]).max()
            flipped = np.abs(got_vecs[:, k] + want_vecs[:, k]).max()
            assert min(direct, flipped) < 1e-6

    def test_two_view_spectrum_symmetric(self):
        rng = np.random.default_rng(45)
        mats = [rng.normal(size=(40, 3)), rng.normal(size=(40, 3))]
        b = batch_of(*mats)
        model = fit_gcca(b, d=6, tau=1.0)
        vals = model.eigenvalues
        np.testing.assert_allclose(vals, -vals[::-1], atol=1e-8)

    def test_view_scaling_invariance(self):
        rng = np.random.default_rng(46)
        m1 = rng.normal(size=(30, 3))
        m2 = rng.normal(size=(30, 4))
        base = fit_gcca(batch_of(m1, m2), d=3, tau=1.0)
        scaled = fit_gcca(batch_of(m1, 5.0 * m2), d=3, tau=1.0)
        np.testing.assert_allclose(scaled.eigenvalues, base.eigenvalues, atol=1e-8)
        np.testing.assert_allclose(scaled.thetas[1], base.thetas[1] / 5.0,
                                   rtol=1e-6, atol=1e-10)
        out_base = apply_gcca(base, batch_of(m1, m2)).matrix
        out_scaled = apply_gcca(scaled, batch_of(m1, 5.0 * m2)).matrix
        np.testing.assert_allclose(out_scaled, out_base, rtol=1e-6, atol=1e-9)

    def test_eigenvector_normalization_against_a(self):
        rng = np.random.default_rng(47)
        mats = [rng.normal(size=(20, 3)), rng.normal(size=(20, 2))]
        model = fit_gcca(batch_of(*mats), d=3, tau=0.5)
        a, _ = oracle_blocks(mats, tau=0.5)
        vecs = stacked_eigvecs(model)
        for k in range(3):
            assert abs(vecs[:, k] @ a @ vecs[:, k] - 1.0) < 1e-8

    def test_generalized_residual_small(self):
        rng = np.random.default_rng(48)
        mats = [rng.normal(size=(35, 4)), rng.normal(size=(35, 3))]
        model = fit_gcca(batch_of(*mats), d=3, tau=1.0)
        a, b = oracle_blocks(mats, tau=1.0)
        vecs = stacked_eigvecs(model)
        for k, rho in enumerate(model.eigenvalues):
            theta = vecs[:, k]
            resid = np.linalg.norm(b @ theta - rho * (a @ theta))
            assert resid <= 1e-7 * np.linalg.norm(a @ theta)

    def test_eigenvalues_sorted_descending(self):
        rng = np.random.default_rng(49)
        model = fit_gcca(
            batch_of(rng.normal(size=(30, 4)), rng.normal(size=(30, 4))),
            d=8, tau=1.0,
        )
        assert (np.diff(model.eigenvalues) <= 1e-12).all()

    def test_single_view_rejected(self):
        rng = np.random.default_rng(50)
        with pytest.raises(InvalidInput):
            fit_gcca(batch_of(rng.normal(size=(10, 3))), d=2, tau=1.0)

    def test_d_out_of_range_rejected(self):
        rng = np.random.default_rng(51)
        b = batch_of(rng.normal(size=(10, 2)), rng.normal(size=(10, 2)))
        with pytest.raises(InvalidInput):
            fit_gcca(b, d=5, tau=1.0)
        with pytest.raises(InvalidInput):
            fit_gcca(b, d=0, tau=1.0)

    def test_constant_view_fails_loudly(self):
        rng = np.random.default_rng(52)
        flat = np.full((10, 2), 3.0)
        b = batch_of(rng.normal(size=(10, 3)), flat)
        with pytest.raises(NumericalError):
            fit_gcca(b, d=2, tau=1.0)

    def test_negative_tau_rejected(self):
        rng = np.random.default_rng(53)
        b = batch_of(rng.normal(size=(10, 2)), rng.normal(size=(10, 2)))
        with pytest.raises(InvalidInput):
            fit_gcca(b, d=2, tau=-1.0)


class TestApplyGcca:
    def test_training_means_map_to_zero(self):
        rng = np.random.default_rng(54)
        mats = [rng.normal(size=(20, 3)), rng.normal(size=(20, 4))]
        model = fit_gcca(batch_of(*mats), d=2, tau=1.0)
        probe = batch_of(
            np.tile(mats[0].mean(axis=0), (2, 1)),
            np.tile(mats[1].mean(axis=0), (2, 1)),
        )
        np.testing.assert_allclose(apply_gcca(model, probe).matrix, 0.0, atol=1e-12)

    def test_doubling_offset_doubles_output(self):
        rng = np.random.default_rng(55)
        mats = [rng.normal(size=(20, 3)), rng.normal(size=(20, 2))]
        model = fit_gcca(batch_of(*mats), d=2, tau=1.0)
        mu = [m.mean(axis=0) for m in mats]
        delta = [rng.normal(size=3), rng.normal(size=2)]
        one = batch_of((mu[0] + delta[0])[None, :], (mu[1] + delta[1])[None, :])
        two = batch_of((mu[0] + 2 * delta[0])[None, :], (mu[1] + 2 * delta[1])[None, :])
        np.testing.assert_allclose(
            apply_gcca(model, two).matrix, 2.0 * apply_gcca(model, one).matrix,
            atol=1e-10,
        )

    def test_dim_mismatch_rejected(self):
        rng = np.random.default_rng(56)
        model = fit_gcca(
            batch_of(rng.normal(size=(10, 3)), rng.normal(size=(10, 2))),
            d=2, tau=1.0,
        )
        with pytest.raises(InvalidInput):
            apply_gcca(model, batch_of(rng.normal(size=(5, 3)),
                                       rng.normal(size=(5, 4))))

    def test_transform_method_and_id(self):
        rng = np.random.default_rng(57)
        b = batch_of(rng.normal(size=(10, 2)), rng.normal(size=(10, 2)))
        model = fit_gcca(b, d=2, tau=1.0)
        out = model.transform(b)
        assert out.encoder_id == "meta:gcca"
        assert out.matrix.shape == (10, 2)
