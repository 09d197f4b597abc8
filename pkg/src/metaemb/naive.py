"""Concatenation and averaging meta-embeddings over length-normalized views.

Both methods are training-free: each view is length-normalized so that no
encoder dominates by scale, then rows are either concatenated (output dim
is the sum of view dims) or averaged after right-padding the shorter views
with zeros (output dim is the max view dim). Padding happens after
normalization; zeros do not change a row's norm, so the order would not
matter, but one order is fixed for definiteness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EmbeddingView, EnsembleBatch, InvalidInput, normalize_rows

NAIVE_KINDS = ("conc", "avg")


def fuse_conc(batch: EnsembleBatch) -> EmbeddingView:
    """Concatenate the length-normalized rows of all views, in ensemble order."""
    fused = np.hstack([normalize_rows(v.matrix) for v in batch.views])
    return EmbeddingView("meta:conc", fused)


def fuse_avg(batch: EnsembleBatch) -> EmbeddingView:
    """Average the length-normalized rows, zero-padding shorter views on the right.

    The divisor is the view count, not the number of nonzero rows.
    """
    d_max = max(batch.dims)
    total = np.zeros((batch.n_sentences, d_max))
    for v in batch.views:
        total[:, : v.dim] += normalize_rows(v.matrix)
    return EmbeddingView("meta:avg", total / batch.n_views)


@dataclass(frozen=True)
class NaiveModel:
    """Stateless combiner descriptor: records the expected ensemble shape.

    kind is "conc" or "avg". Kept as a fittable/savable model so the naive
    methods ride the same persistence and transform plumbing as the
    trained ones.
    """

    kind: str
    encoder_ids: tuple[str, ...]
    expected_dims: tuple[int, ...]
    output_dim: int

    def __post_init__(self):
        if self.kind not in NAIVE_KINDS:
            raise InvalidInput(f"unknown naive kind {self.kind!r}")
        if any(d <= 0 for d in self.expected_dims):
            raise InvalidInput("expected_dims must all be positive")
        want = sum(self.expected_dims) if self.kind == "conc" else max(self.expected_dims)
        if self.output_dim != want:
            raise InvalidInput(
                f"output_dim {self.output_dim} inconsistent with kind {self.kind!r}"
            )

    @classmethod
    def fit(cls, batch: EnsembleBatch, kind: str) -> "NaiveModel":
        if kind not in NAIVE_KINDS:
            raise InvalidInput(f"unknown naive kind {kind!r}")
        dims = batch.dims
        out = sum(dims) if kind == "conc" else max(dims)
        return cls(kind, tuple(v.encoder_id for v in batch.views), dims, out)

    def transform(self, batch: EnsembleBatch) -> EmbeddingView:
        if batch.dims != self.expected_dims:
            raise InvalidInput(
                f"view dims {batch.dims} do not match the fitted dims {self.expected_dims}"
            )
        return fuse_conc(batch) if self.kind == "conc" else fuse_avg(batch)
