"""Centered, d-truncated SVD projection over concatenated normalized embeddings.

The training matrix is the row-wise concatenation of the length-normalized
views, centered by its column mean. Instead of factorizing that n x D
matrix directly, the fit eigendecomposes the smaller Gram matrix (D x D
when n > D, n x n otherwise): with n in the hundreds of thousands the
direct factorization is memory-prohibitive while D stays in the low
thousands. New rows are centered with the training mean and projected onto
the top-d right singular subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EmbeddingView, EnsembleBatch, InvalidInput, NumericalError
from .naive import fuse_conc

# Relative singular-value cutoff below which a right singular vector cannot
# be recovered from the n x n Gram path and the basis is completed instead.
_RANK_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class SvdModel:
    """Fitted truncated-SVD combiner.

    projection holds the top-d right singular vectors as columns (D x d,
    orthonormal); mean is the training concatenation's column mean;
    singular_values are non-negative and non-increasing.
    """

    projection: np.ndarray
    mean: np.ndarray
    d: int
    singular_values: np.ndarray
    encoder_ids: tuple[str, ...]
    view_dims: tuple[int, ...]

    def transform(self, batch: EnsembleBatch) -> EmbeddingView:
        return apply_svd(self, batch)


def _descending_eig(gram: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        w, vecs = np.linalg.eigh(gram)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(-w, kind="stable")[:d]
    return np.clip(w[order], 0.0, None), vecs[:, order]


def _complete_columns(cols: list[np.ndarray | None], dim: int) -> np.ndarray:
    """Fill None slots with a deterministic orthonormal completion.

    Canonical basis vectors are orthogonalized against the columns already
    placed; candidates that project to (near) nothing are skipped.
    """
    placed: list[np.ndarray] = [c for c in cols if c is not None]
    cursor = 0
    for i, c in enumerate(cols):
        if c is not None:
            continue
        while cursor < dim:
            cand = np.zeros(dim)
            cand[cursor] = 1.0
            cursor += 1
            for _ in range(2):  # re-orthogonalize for stability
                for p in placed:
                    cand -= (p @ cand) * p
            norm = np.linalg.norm(cand)
            if norm > 1e-6:
                cand /= norm
                cols[i] = cand
                placed.append(cand)
                break
        else:
            raise NumericalError("could not complete an orthonormal basis")
    return np.column_stack(cols)


def _fix_column_signs(mat: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive (determinism)."""
    out = mat.copy()
    for k in range(out.shape[1]):
        idx = int(np.argmax(np.abs(out[:, k])))
        if out[idx, k] < 0:
            out[:, k] = -out[:, k]
    return out


def fit_svd(batch: EnsembleBatch, d: int) -> SvdModel:
    """Fit the d-truncated SVD of the centered concatenated training matrix.

    Requires d <= min(n_sentences, sum of view dims). Singular values are
    recorded in descending order; projection columns carry a fixed sign
    convention (largest-magnitude entry positive) so refits are
    reproducible bit-for-bit.
    """
    conc = fuse_conc(batch).matrix
    n, total = conc.shape
    if not 1 <= d <= min(n, total):
        raise InvalidInput(
            f"d={d} must be in [1, min(n_sentences={n}, total_dim={total})]"
        )
    mean = conc.mean(axis=0)
    centered = conc - mean

    if n > total:
        lam, proj = _descending_eig(centered.T @ centered, d)
        sigma = np.sqrt(lam)
    else:
        lam, left = _descending_eig(centered @ centered.T, d)
        sigma = np.sqrt(lam)
        cutoff = sigma[0] * _RANK_EPS if sigma.size else 0.0
        cols: list[np.ndarray | None] = []
        for i in range(d):
            if sigma[i] > cutoff:
                cols.append(centered.T @ left[:, i] / sigma[i])
            else:
                cols.append(None)  # null direction, fill deterministically
        proj = _complete_columns(cols, total)

    if not (np.isfinite(proj).all() and np.isfinite(sigma).all()):
        raise NumericalError("SVD produced non-finite factors")
    proj = _fix_column_signs(proj)
    return SvdModel(
        projection=proj,
        mean=mean,
        d=d,
        singular_values=sigma,
        encoder_ids=tuple(v.encoder_id for v in batch.views),
        view_dims=batch.dims,
    )


def apply_svd(model: SvdModel, batch: EnsembleBatch) -> EmbeddingView:
    """Project new data: each output row is Vt (conc_row - training_mean)."""
    if batch.dims != model.view_dims:
        raise InvalidInput(
            f"view dims {batch.dims} do not match the fitted dims {model.view_dims}"
        )
    conc = fuse_conc(batch).matrix
    return EmbeddingView("meta:svd", (conc - model.mean) @ model.projection)
