"""Sentence meta-embeddings: fuse precomputed encoder views, score on STS pairs."""

from .core import (
    DegenerateInput,
    EmbeddingView,
    EnsembleBatch,
    FormatError,
    InvalidInput,
    MetaembError,
    NumericalError,
    length_normalize,
    normalize_rows,
)
from .naive import NaiveModel, fuse_avg, fuse_conc
from .svd import SvdModel, apply_svd, fit_svd
from .gcca import GccaModel, apply_gcca, fit_gcca
from .autoenc import AeConfig, AeModel, apply_ae, fit_ae, reconstruction_loss
from .evaluation import (
    EvalReport,
    StsDataset,
    StsSubset,
    evaluate,
    pearson,
    predict_similarities,
    spearman,
)
from .baseline import make_up_projection, up_project
from .fileio import (
    load_model,
    read_embeddings,
    read_sts,
    save_model,
    write_embeddings,
    write_sts,
)

__version__ = "0.1.0"

__all__ = [
    "AeConfig",
    "AeModel",
    "DegenerateInput",
    "EmbeddingView",
    "EnsembleBatch",
    "EvalReport",
    "FormatError",
    "GccaModel",
    "InvalidInput",
    "MetaembError",
    "NaiveModel",
    "NumericalError",
    "StsDataset",
    "StsSubset",
    "SvdModel",
    "apply_ae",
    "apply_gcca",
    "apply_svd",
    "evaluate",
    "fit_ae",
    "fit_gcca",
    "fit_svd",
    "fuse_avg",
    "fuse_conc",
    "length_normalize",
    "load_model",
    "make_up_projection",
    "normalize_rows",
    "pearson",
    "predict_similarities",
    "read_embeddings",
    "read_sts",
    "reconstruction_loss",
    "save_model",
    "spearman",
    "up_project",
    "write_embeddings",
    "write_sts",
]
