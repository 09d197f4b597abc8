"""Sentence encoders behind a single spec-string interface.

A spec is "<scheme>:<argument>":

    wordavg:<vectors.txt>   average of word and character-trigram vectors,
                            word2vec text format; offline and deterministic
    sbert:<model-name>      sentence-transformers model (optional dependency)
    use:<model-path>        TF-Hub saved encoder (optional dependency)

Every encoder exposes encode(sentences) -> float32 matrix with one row per
sentence, in order.
"""

import importlib.util
from pathlib import Path

import numpy as np

from .core import ExportError


def load_word_vectors(path) -> tuple[dict[str, np.ndarray], int]:
    """word2vec text format: optional "count dim" header, then one
    token-plus-floats line per vector."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ExportError(f"cannot load word vectors: {exc}") from exc
    def is_header(line: str) -> bool:
        fields = line.split()
        return len(fields) == 2 and all(f.isdigit() for f in fields)

    if lines and is_header(lines[0]):
        lines = lines[1:]
    table: dict[str, np.ndarray] = {}
    dim = None
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        token, *values = line.split()
        try:
            vec = np.array([float(v) for v in values], dtype=np.float32)
        except ValueError as exc:
            raise ExportError(f"{path}: line {number}: {exc}") from exc
        if dim is None:
            dim = vec.size
        if vec.size != dim or dim == 0:
            raise ExportError(
                f"{path}: line {number}: expected {dim} values, got {vec.size}"
            )
        table[token] = vec
    if not table:
        raise ExportError(f"{path}: no word vectors found")
    return table, dim


def trigrams(token: str) -> list[str]:
    return [token[i:i + 3] for i in range(len(token) - 2)]


class WordAverageEncoder:
    """Mean of the vectors found for each token and each token trigram.

    Sentences whose tokens and trigrams are all out of vocabulary map to the
    zero vector.
    """

    def __init__(self, vectors_path):
        self.table, self.dim = load_word_vectors(vectors_path)

    def encode(self, sentences) -> np.ndarray:
        out = np.zeros((len(sentences), self.dim), dtype=np.float32)
        for i, sentence in enumerate(sentences):
            keys = []
            for token in sentence.lower().split():
                keys.append(token)
                keys.extend(trigrams(token))
            found = [self.table[k] for k in keys if k in self.table]
            if found:
                out[i] = np.mean(found, axis=0, dtype=np.float32)
        return out


class SbertEncoder:
    def __init__(self, model_name: str):
        if importlib.util.find_spec("sentence_transformers") is None:
            raise ExportError(
                "sbert encoders need the sentence-transformers package "
                "(pip install metaemb-exporter[sbert])"
            )
        from sentence_transformers import SentenceTransformer

        try:
            self.model = SentenceTransformer(model_name)
        except Exception as exc:
            raise ExportError(f"failed to load sbert model {model_name!r}: {exc}") from exc

    def encode(self, sentences) -> np.ndarray:
        emb = self.model.encode(list(sentences), convert_to_numpy=True,
                                show_progress_bar=False)
        return np.asarray(emb, dtype=np.float32)


class UseEncoder:
    def __init__(self, model_path: str):
        if importlib.util.find_spec("tensorflow_hub") is None:
            raise ExportError(
                "use encoders need the tensorflow-hub package "
                "(pip install metaemb-exporter[use])"
            )
        import tensorflow_hub as hub

        try:
            self.model = hub.load(model_path)
        except Exception as exc:
            raise ExportError(f"failed to load use model {model_path!r}: {exc}") from exc

    def encode(self, sentences) -> np.ndarray:
        return np.asarray(self.model(list(sentences)), dtype=np.float32)


_SCHEMES = {
    "wordavg": WordAverageEncoder,
    "sbert": SbertEncoder,
    "use": UseEncoder,
}


def make_encoder(spec: str):
    scheme, sep, argument = spec.partition(":")
    if not sep or not argument or scheme not in _SCHEMES:
        known = ", ".join(f"{s}:<...>" for s in sorted(_SCHEMES))
        raise ExportError(f"bad encoder spec {spec!r}; expected one of {known}")
    return _SCHEMES[scheme](argument)


def encode_batches(encoder, sentences, batch_size: int) -> np.ndarray:
    """Run the encoder over consecutive slices and stack the results."""
    parts = []
    for start in range(0, len(sentences), batch_size):
        chunk = encoder.encode(sentences[start:start + batch_size])
        part = np.asarray(chunk, dtype=np.float32)
        if part.ndim != 2 or part.shape[0] != len(sentences[start:start + batch_size]):
            raise ExportError(
                f"encoder returned shape {part.shape} for a "
                f"{len(sentences[start:start + batch_size])}-sentence batch"
            )
        parts.append(part)
    return np.vstack(parts)
