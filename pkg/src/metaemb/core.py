"""Shared numeric types and the aligned multi-view container used by all combiners.

Everything downstream works on 64-bit floats: fusion methods feed
eigendecompositions and SVDs whose conditioning degrades quickly in
single precision, so inputs are widened on construction no matter how
they were stored on disk.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Rows with an L2 norm below this count as zero and pass through
# normalization unchanged.
ZERO_NORM_EPS = 1e-12


class MetaembError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(MetaembError):
    """An argument violates a documented precondition."""


class NumericalError(MetaembError):
    """A numeric routine failed (factorization breakdown, non-finite values).

    ``epoch`` is set (1-based) when the failure happened during iterative
    training, so callers can tell how far a run got before diverging.
    """

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class FormatError(MetaembError):
    """A file does not conform to one of the on-disk formats."""


class DegenerateInput(MetaembError):
    """Statistically degenerate input, e.g. a constant vector fed to a correlation."""


def _validated_matrix(matrix, label: str) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInput(f"{label}: expected a 2-D matrix, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInput(f"{label}: matrix must be at least 1x1, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidInput(f"{label}: matrix contains NaN or Inf entries")
    return np.ascontiguousarray(arr)


@dataclass(frozen=True, eq=False)
class EmbeddingView:
    """One encoder's embedding matrix for a sentence list.

    Rows are sentences, columns are embedding dimensions. The matrix is
    stored as a read-only float64 array; instances are immutable and safe
    to share across threads.
    """

    encoder_id: str
    matrix: np.ndarray
    dim: int = 0  # derived from the matrix when omitted

    def __post_init__(self):
        arr = _validated_matrix(self.matrix, f"view {self.encoder_id!r}")
        if self.dim == 0:
            object.__setattr__(self, "dim", arr.shape[1])
        elif arr.shape[1] != self.dim:
            raise InvalidInput(
                f"view {self.encoder_id!r}: declared dim {self.dim} "
                f"but matrix has {arr.shape[1]} columns"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class EnsembleBatch:
    """Aligned collection of views of the same sentences from distinct encoders.

    All views must agree on the row count and carry pairwise distinct
    encoder ids; row i of every view embeds the same sentence.
    """

    views: tuple[EmbeddingView, ...]
    n_sentences: int = field(init=False)

    def __post_init__(self):
        views = tuple(self.views)
        if not views:
            raise InvalidInput("ensemble must contain at least one view")
        rows = views[0].n_rows
        for v in views[1:]:
            if v.n_rows != rows:
                raise InvalidInput(
                    f"view {v.encoder_id!r} has {v.n_rows} rows, expected {rows}"
                )
        ids = [v.encoder_id for v in views]
        if len(set(ids)) != len(ids):
            raise InvalidInput(f"encoder ids must be pairwise distinct, got {ids}")
        object.__setattr__(self, "views", views)
        object.__setattr__(self, "n_sentences", rows)

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(v.dim for v in self.views)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)


def normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale each row to unit L2 norm; rows with norm < ZERO_NORM_EPS stay as-is."""
    out = np.array(matrix, dtype=np.float64)
    norms = np.linalg.norm(out, axis=1)
    nonzero = norms >= ZERO_NORM_EPS
    out[nonzero] /= norms[nonzero, None]
    return out


def length_normalize(view: EmbeddingView) -> EmbeddingView:
    """Return a copy of ``view`` with every row scaled to unit L2 norm.

    All-zero rows (norm below ZERO_NORM_EPS) are returned unchanged; they
    arise legitimately from zero padding and from encoders that map empty
    input to the zero vector.
    """
    return EmbeddingView(view.encoder_id, normalize_rows(view.matrix))


def column_means(view: EmbeddingView) -> np.ndarray:
    """Arithmetic mean of each column of the view's matrix."""
    return view.matrix.mean(axis=0)
