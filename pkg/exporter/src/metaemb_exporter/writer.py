"""Binary embedding file writer.

Layout (all integers little-endian):

    offset  size  field
    0       8     magic "METAEMB1"
    8       4     u32 encoder id byte length
    12      var   UTF-8 encoder id
    ..      8     u64 row count
    ..      8     u64 column count
    ..      1     u8 dtype code (0 = float32)
    ..      var   row-major float payload

This mirrors what the fusion tools read; the exporter emits float32 only.
"""

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .core import ExportError

MAGIC = b"METAEMB1"
FLOAT32_CODE = 0


def write_embedding_file(path, encoder_id: str, matrix) -> None:
    """Write one encoder's output matrix; replaces the target atomically."""
    arr = np.ascontiguousarray(matrix, dtype=np.float32)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ExportError(f"embedding matrix must be 2-D and non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ExportError(f"encoder {encoder_id!r} produced non-finite values")
    ident = encoder_id.encode("utf-8")
    n, d = arr.shape
    blob = b"".join((
        MAGIC,
        struct.pack("<I", len(ident)),
        ident,
        struct.pack("<QQB", n, d, FLOAT32_CODE),
        arr.astype("<f4", copy=False).tobytes(order="C"),
    ))
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, target)
    except BaseException:
        os.unlink(tmp)
        raise
