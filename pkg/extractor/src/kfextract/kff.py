"""Writer for the KFF1 feature container consumed by the downstream pipeline.

Layout (little-endian, no padding): magic b"KFF1", u32 version 1, u64 row
count, u64 dimension, u32 name length, UTF-8 video name, float32 row-major
payload. Values are rounded to float32 at write time.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from kfextract.errors import DataError

MAGIC = b"KFF1"
VERSION = 1


def write_features(path: str | Path, video: str, data: np.ndarray) -> None:
    """Write an N x D float matrix; equal inputs produce identical bytes."""
    data = np.ascontiguousarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise DataError("feature data must be a 2-D array")
    if data.shape[0] == 0 or data.shape[1] == 0:
        raise DataError("feature data must be non-empty in both dimensions")
    if not np.all(np.isfinite(data)):
        raise DataError("feature data contains non-finite values")
    if not video:
        raise DataError("video name must be non-empty")
    name_bytes = video.encode("utf-8")
    header = MAGIC + struct.pack(
        "<IQQI", VERSION, data.shape[0], data.shape[1], len(name_bytes)
    )
    payload = np.ascontiguousarray(data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + name_bytes + payload)
