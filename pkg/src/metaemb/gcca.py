"""Generalized canonical correlation analysis via a block generalized eigenproblem.

For J views, the fit assembles two symmetric block matrices from the raw
(unnormalized) views' empirical covariances:

  A = blockdiag(S_11, ..., S_JJ)   with regularized diagonals
  B = the same grid with zero diagonal blocks and S_jj' off-diagonal

and solves B theta = rho A theta. Regularization adds tau times the mean
diagonal entry of S_jj to each diagonal entry of that block, which keeps A
positive definite whenever tau > 0 and no view is constant. The problem is
reduced by the Cholesky factor of A to an ordinary symmetric eigensolve;
the eigenvectors of the top-d eigenvalues are split into per-view segments
and stacked into the projection matrices Theta_j (d x d_j). A new
ensemble row maps to sum_j Theta_j (x_j - mu_j).

Covariances use the 1/n convention throughout. Retained eigenvectors are
normalized to theta' A theta = 1, and their sign is fixed so the first
significant entry is positive; both choices only pin down scale factors
the problem itself leaves free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .core import EmbeddingView, EnsembleBatch, InvalidInput, NumericalError

# Entries below this fraction of the column max do not count as the "first
# nonzero" when fixing eigenvector signs.
_SIGN_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class GccaModel:
    """Fitted GCCA combiner: per-view projections, means, and the spectrum head."""

    thetas: tuple[np.ndarray, ...]
    means: tuple[np.ndarray, ...]
    tau: float
    d: int
    eigenvalues: np.ndarray
    encoder_ids: tuple[str, ...]
    view_dims: tuple[int, ...]

    def transform(self, batch: EnsembleBatch) -> EmbeddingView:
        return apply_gcca(self, batch)


def cross_covariance(batch: EnsembleBatch, j: int, j2: int) -> np.ndarray:
    """Empirical cross-covariance of views j and j2 (1/n normalization)."""
    if not (0 <= j < batch.n_views and 0 <= j2 < batch.n_views):
        raise InvalidInput(f"view indices ({j}, {j2}) out of range for J={batch.n_views}")
    a = batch.views[j].matrix
    b = batch.views[j2].matrix
    ac = a - a.mean(axis=0)
    bc = b - b.mean(axis=0)
    return ac.T @ bc / a.shape[0]


def covariance_blocks(batch: EnsembleBatch, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Assemble the regularized block-diagonal A and off-diagonal B matrices."""
    if tau < 0:
        raise InvalidInput(f"tau must be non-negative, got {tau}")
    centered = [v.matrix - v.matrix.mean(axis=0) for v in batch.views]
    stacked = np.hstack(centered)
    full = stacked.T @ stacked / batch.n_sentences

    total = stacked.shape[1]
    a = np.zeros((total, total))
    b = full.copy()
    offset = 0
    for dim in batch.dims:
        sl = slice(offset, offset + dim)
        block = full[sl, sl]
        a[sl, sl] = block + tau * np.mean(np.diag(block)) * np.eye(dim)
        b[sl, sl] = 0.0
        offset += dim
    b = 0.5 * (b + b.T)  # scrub rounding asymmetry before whitening
    return a, b


def _fix_vector_signs(theta: np.ndarray) -> np.ndarray:
    out = theta.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        cutoff = _SIGN_EPS * np.max(np.abs(col))
        for entry in col:
            if abs(entry) > cutoff:
                if entry < 0:
                    out[:, k] = -col
                break
    return out


def fit_gcca(batch: EnsembleBatch, d: int, tau: float) -> GccaModel:
    """Fit GCCA on the raw views (no length normalization).

    Solves B theta = rho A theta by Cholesky reduction: A = L L', then a
    symmetric eigensolve of L^-1 B L^-T. Requires J >= 2 (with one view B
    is identically zero and the problem is vacuous) and
    1 <= d <= sum of view dims.
    """
    if batch.n_views < 2:
        raise InvalidInput("GCCA needs at least two views (J >= 2)")
    total = batch.total_dim
    if not 1 <= d <= total:
        raise InvalidInput(f"d={d} must be in [1, total_dim={total}]")

    a, b = covariance_blocks(batch, tau)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"regularized covariance block-diagonal is not positive definite "
            f"(tau={tau}); a constant view or tau=0 can cause this"
        ) from exc

    half = solve_triangular(chol, b, lower=True)
    whitened = solve_triangular(chol, half.T, lower=True).T
    whitened = 0.5 * (whitened + whitened.T)
    try:
        rho, vecs = np.linalg.eigh(whitened)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc

    order = np.argsort(-rho, kind="stable")[:d]
    top = rho[order]
    # Back-transform: theta = L^-T y keeps theta' A theta = y'y = 1.
    theta = solve_triangular(chol.T, vecs[:, order], lower=False)
    theta = _fix_vector_signs(theta)

    thetas = []
    offset = 0
    for dim in batch.dims:
        thetas.append(np.ascontiguousarray(theta[offset : offset + dim, :].T))
        offset += dim

    return GccaModel(
        thetas=tuple(thetas),
        means=tuple(v.matrix.mean(axis=0) for v in batch.views),
        tau=float(tau),
        d=d,
        eigenvalues=top,
        encoder_ids=tuple(v.encoder_id for v in batch.views),
        view_dims=batch.dims,
    )


def apply_gcca(model: GccaModel, batch: EnsembleBatch) -> EmbeddingView:
    """Map new ensemble rows to sum_j Theta_j (x_j - mu_j)."""
    if batch.dims != model.view_dims:
        raise InvalidInput(
            f"view dims {batch.dims} do not match the fitted dims {model.view_dims}"
        )
    out = np.zeros((batch.n_sentences, model.d))
    for view, theta, mu in zip(batch.views, model.thetas, model.means):
        out += (view.matrix - mu) @ theta.T
    return EmbeddingView("meta:gcca", out)
