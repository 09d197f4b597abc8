"""Sentence encoder exporter: turns pre-trained encoders into embedding files."""

from .cli import export, main
from .core import ExportError, ExportJob, load_sentences
from .encoders import (
    SbertEncoder,
    UseEncoder,
    WordAverageEncoder,
    encode_batches,
    load_word_vectors,
    make_encoder,
    trigrams,
)
from .writer import FLOAT32_CODE, MAGIC, write_embedding_file

__version__ = "0.1.0"

__all__ = [
    "ExportError",
    "ExportJob",
    "FLOAT32_CODE",
    "MAGIC",
    "SbertEncoder",
    "UseEncoder",
    "WordAverageEncoder",
    "encode_batches",
    "export",
    "load_sentences",
    "load_word_vectors",
    "main",
    "make_encoder",
    "trigrams",
    "write_embedding_file",
]
