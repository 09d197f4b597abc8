"""Random up-projection control.

Multiplying embeddings by a fixed random matrix raises their
dimensionality without adding information; comparing meta-embeddings
against up-projected singles separates genuine fusion gains from
dimensionality artifacts. One matrix is sampled per (seed, source dim,
target dim) and reused for every row, so a run is a fixed linear map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EmbeddingView, InvalidInput


@dataclass(frozen=True, eq=False)
class UpProjection:
    """Seeded random projection matrix, entries uniform in +-1/sqrt(source_dim)."""

    matrix: np.ndarray
    seed: int
    source_dim: int
    target_dim: int


def make_up_projection(source_dim: int, target_dim: int, seed: int) -> UpProjection:
    if target_dim < 1:
        raise InvalidInput(f"target dim must be >= 1, got {target_dim}")
    bound = 1.0 / np.sqrt(source_dim)
    mat = np.random.default_rng(seed).uniform(-bound, bound, size=(target_dim, source_dim))
    mat.setflags(write=False)
    return UpProjection(mat, seed, source_dim, target_dim)


def up_project(view: EmbeddingView, d: int, seed: int) -> EmbeddingView:
    """Map every row x to M x for the seeded random matrix M (d x d_j)."""
    proj = make_up_projection(view.dim, d, seed)
    return EmbeddingView(
        f"{view.encoder_id}-up{d}-seed{seed}",
        view.matrix @ proj.matrix.T,
    )
