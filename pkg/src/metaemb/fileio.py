"""Bit-exact on-disk formats: embedding matrices, STS pair files, fitted models.

Embedding file (magic ``METAEMB1``), all integers little-endian::

    offset  size  field
    0       8     magic "METAEMB1"
    8       4     u32 byte length of encoder_id
    12      L     encoder_id, UTF-8
    +0      8     u64 n_rows
    +8      8     u64 n_cols
    +16     1     dtype code: 0 = float32, 1 = float64
    +17     ...   payload, row-major, little-endian, exactly
                  n_rows * n_cols * itemsize bytes

float32 payloads are accepted for compactness and widened to float64 in
memory. Any size mismatch, bad magic, or unknown dtype raises FormatError;
non-finite payload values raise InvalidInput.

Model file (magic ``METAMDL1``): a version tag, the model kind, a
JSON-encoded fitting config, and a sequence of named float64 arrays in the
same little-endian encoding. Save followed by load reproduces every
parameter bit-exactly.

STS pair file: UTF-8 text, one record per line, four tab-separated fields
``subset_name<TAB>index_a<TAB>index_b<TAB>gold_score``. Lines starting
with ``#`` and blank lines are skipped. Indices refer to rows of a shared
unique-sentence embedding file, so each sentence is encoded once however
many pairs mention it.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .core import EmbeddingView, FormatError, InvalidInput
from .autoenc import AeConfig, AeModel, FeedForwardNet
from .evaluation import StsDataset, StsSubset
from .gcca import GccaModel
from .naive import NaiveModel
from .svd import SvdModel

EMB_MAGIC = b"METAEMB1"
MODEL_MAGIC = b"METAMDL1"
MODEL_VERSION = 1

_DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_NAMES = {"float32": 0, "float64": 1}


class _Reader:
    """Cursor over a byte buffer that turns overruns into FormatError."""

    def __init__(self, buf: bytes, path: str):
        self.buf = buf
        self.off = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.off + n > len(self.buf):
            raise FormatError(
                f"{self.path}: truncated file: {what} needs {n} bytes at offset "
                f"{self.off}, only {len(self.buf) - self.off} available"
            )
        out = self.buf[self.off : self.off + n]
        self.off += n
        return out

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def u64(self, what: str) -> int:
        return struct.unpack("<Q", self.take(8, what))[0]

    def string(self, what: str) -> str:
        n = self.u32(f"{what} length")
        raw = self.take(n, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{self.path}: {what} is not valid UTF-8") from exc

    def remaining(self) -> int:
        return len(self.buf) - self.off


def _pack_string(text: str) -> bytes:
    raw = text.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def write_embeddings(view: EmbeddingView, path, dtype: str = "float64") -> None:
    """Write a view to the embedding format; dtype picks the payload width."""
    if dtype not in _DTYPE_NAMES:
        raise InvalidInput(f"dtype must be 'float32' or 'float64', got {dtype!r}")
    code = _DTYPE_NAMES[dtype]
    payload = np.ascontiguousarray(view.matrix.astype(_DTYPE_CODES[code])).tobytes()
    with open(path, "wb") as fh:
        fh.write(EMB_MAGIC)
        fh.write(_pack_string(view.encoder_id))
        fh.write(struct.pack("<QQB", view.n_rows, view.dim, code))
        fh.write(payload)


def read_embeddings(path) -> EmbeddingView:
    """Read an embedding file; float32 payloads are widened to float64."""
    with open(path, "rb") as fh:
        buf = fh.read()
    r = _Reader(buf, str(path))
    magic = r.take(8, "magic")
    if magic != EMB_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {EMB_MAGIC!r}")
    encoder_id = r.string("encoder_id")
    n_rows = r.u64("n_rows")
    n_cols = r.u64("n_cols")
    code = r.u8("dtype code")
    if code not in _DTYPE_CODES:
        raise FormatError(f"{path}: unknown dtype code {code}")
    dt = _DTYPE_CODES[code]
    expected = n_rows * n_cols * dt.itemsize
    actual = r.remaining()
    if actual != expected:
        raise FormatError(
            f"{path}: payload size mismatch: header implies {expected} bytes, "
            f"found {actual}"
        )
    data = np.frombuffer(r.take(expected, "payload"), dtype=dt).reshape(n_rows, n_cols)
    return EmbeddingView(encoder_id, data.astype(np.float64))


def read_sts(path) -> StsDataset:
    """Parse a tab-separated STS pair file into named subsets."""
    groups: dict[str, list[tuple[int, int, float]]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise FormatError(
                    f"{path}: line {lineno}: expected 4 tab-separated fields, got {len(parts)}"
                )
            name = parts[0]
            try:
                ia = int(parts[1])
                ib = int(parts[2])
                gold = float(parts[3])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from exc
            if not np.isfinite(gold):
                raise FormatError(f"{path}: line {lineno}: gold score must be finite")
            groups.setdefault(name, []).append((ia, ib, gold))
    if not groups:
        raise FormatError(f"{path}: no records found")
    subsets = {
        name: StsSubset(
            np.array([r[0] for r in recs], dtype=np.int64),
            np.array([r[1] for r in recs], dtype=np.int64),
            np.array([r[2] for r in recs]),
        )
        for name, recs in groups.items()
    }
    return StsDataset(subsets)


def write_sts(ds: StsDataset, path) -> None:
    """Write a dataset back out; gold scores use shortest-roundtrip formatting."""
    with open(path, "w", encoding="utf-8") as fh:
        for name, sub in ds.subsets.items():
            for ia, ib, g in zip(sub.index_a, sub.index_b, sub.gold):
                fh.write(f"{name}\t{ia}\t{ib}\t{float(g)!r}\n")


# --- model persistence -----------------------------------------------------

FusionModel = NaiveModel | SvdModel | GccaModel | AeModel


def _net_arrays(prefix: str, net: FeedForwardNet):
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        yield f"{prefix}_w{k}", w
        yield f"{prefix}_b{k}", b


def _encode_model(model: FusionModel):
    if isinstance(model, NaiveModel):
        config = {
            "kind": model.kind,
            "encoder_ids": list(model.encoder_ids),
            "expected_dims": list(model.expected_dims),
            "output_dim": model.output_dim,
        }
        return model.kind, config, []
    if isinstance(model, SvdModel):
        config = {
            "d": model.d,
            "encoder_ids": list(model.encoder_ids),
            "view_dims": list(model.view_dims),
        }
        arrays = [
            ("projection", model.projection),
            ("mean", model.mean),
            ("singular_values", model.singular_values),
        ]
        return "svd", config, arrays
    if isinstance(model, GccaModel):
        config = {
            "d": model.d,
            "tau": model.tau,
            "encoder_ids": list(model.encoder_ids),
            "view_dims": list(model.view_dims),
        }
        arrays = [("eigenvalues", model.eigenvalues)]
        for j, (theta, mu) in enumerate(zip(model.thetas, model.means)):
            arrays.append((f"theta_{j}", theta))
            arrays.append((f"mean_{j}", mu))
        return "gcca", config, arrays
    if isinstance(model, AeModel):
        cfg = model.config
        config = {
            "d": cfg.d,
            "loss_kind": cfg.loss_kind,
            "hidden_count": cfg.hidden_count,
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "lr": cfg.lr,
            "beta1": cfg.beta1,
            "beta2": cfg.beta2,
            "seed": cfg.seed,
            "encoder_ids": list(model.encoder_ids),
            "view_dims": list(model.view_dims),
        }
        arrays = [("train_log", model.train_log)]
        for j, net in enumerate(model.encoders):
            arrays.extend(_net_arrays(f"enc{j}", net))
        for j, net in enumerate(model.decoders):
            arrays.extend(_net_arrays(f"dec{j}", net))
        return "ae", config, arrays
    raise InvalidInput(f"cannot serialize object of type {type(model).__name__}")


def save_model(model: FusionModel, path) -> None:
    """Serialize a fitted model; the round-trip is lossless for every parameter."""
    kind, config, arrays = _encode_model(model)
    out = bytearray()
    out += MODEL_MAGIC
    out += struct.pack("<I", MODEL_VERSION)
    out += _pack_string(kind)
    out += _pack_string(json.dumps(config, sort_keys=True))
    out += struct.pack("<I", len(arrays))
    for name, arr in arrays:
        a = np.ascontiguousarray(np.asarray(arr, dtype="<f8"))
        out += _pack_string(name)
        out += struct.pack("<B", a.ndim)
        for s in a.shape:
            out += struct.pack("<Q", s)
        out += a.tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(out))


def _rebuild_net(arrays: dict[str, np.ndarray], prefix: str, hidden_count: int) -> FeedForwardNet:
    ws, bs = [], []
    k = 0
    while f"{prefix}_w{k}" in arrays:
        ws.append(arrays[f"{prefix}_w{k}"])
        bs.append(arrays[f"{prefix}_b{k}"])
        k += 1
    if len(ws) != hidden_count + 1:
        raise FormatError(f"model file: {prefix} has {len(ws)} layers, expected {hidden_count + 1}")
    return FeedForwardNet(tuple(ws), tuple(bs), hidden_count)


def load_model(path) -> FusionModel:
    """Load a model saved by save_model, dispatching on the kind tag."""
    with open(path, "rb") as fh:
        buf = fh.read()
    r = _Reader(buf, str(path))
    magic = r.take(8, "magic")
    if magic != MODEL_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MODEL_MAGIC!r}")
    version = r.u32("version")
    if version != MODEL_VERSION:
        raise FormatError(f"{path}: unsupported model format version {version}")
    kind = r.string("kind")
    try:
        config = json.loads(r.string("config"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: config block is not valid JSON: {exc}") from exc

    arrays: dict[str, np.ndarray] = {}
    for _ in range(r.u32("array count")):
        name = r.string("array name")
        ndim = r.u8("array ndim")
        shape = tuple(r.u64(f"array {name} dim") for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(r.take(count * 8, f"array {name} payload"), dtype="<f8")
        arrays[name] = data.reshape(shape).astype(np.float64)
    if r.remaining():
        raise FormatError(f"{path}: {r.remaining()} trailing bytes after last array")

    try:
        if kind in ("conc", "avg"):
            return NaiveModel(
                kind=config["kind"],
                encoder_ids=tuple(config["encoder_ids"]),
                expected_dims=tuple(config["expected_dims"]),
                output_dim=config["output_dim"],
            )
        if kind == "svd":
            return SvdModel(
                projection=arrays["projection"],
                mean=arrays["mean"],
                d=config["d"],
                singular_values=arrays["singular_values"],
                encoder_ids=tuple(config["encoder_ids"]),
                view_dims=tuple(config["view_dims"]),
            )
        if kind == "gcca":
            n_views = len(config["view_dims"])
            return GccaModel(
                thetas=tuple(arrays[f"theta_{j}"] for j in range(n_views)),
                means=tuple(arrays[f"mean_{j}"] for j in range(n_views)),
                tau=config["tau"],
                d=config["d"],
                eigenvalues=arrays["eigenvalues"],
                encoder_ids=tuple(config["encoder_ids"]),
                view_dims=tuple(config["view_dims"]),
            )
        if kind == "ae":
            n_views = len(config["view_dims"])
            hidden = config["hidden_count"]
            return AeModel(
                encoders=tuple(_rebuild_net(arrays, f"enc{j}", hidden) for j in range(n_views)),
                decoders=tuple(_rebuild_net(arrays, f"dec{j}", hidden) for j in range(n_views)),
                loss_kind=config["loss_kind"],
                d=config["d"],
                train_log=arrays["train_log"],
                config=AeConfig(
                    d=config["d"],
                    loss_kind=config["loss_kind"],
                    hidden_count=hidden,
                    epochs=config["epochs"],
                    batch_size=config["batch_size"],
                    lr=config["lr"],
                    beta1=config["beta1"],
                    beta2=config["beta2"],
                    seed=config["seed"],
                ),
                encoder_ids=tuple(config["encoder_ids"]),
                view_dims=tuple(config["view_dims"]),
            )
    except KeyError as exc:
        raise FormatError(f"{path}: model file is missing field {exc}") from exc
    raise FormatError(f"{path}: unknown model kind {kind!r}")
