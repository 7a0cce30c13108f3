"""Frame-feature matrices, the KFF1 on-disk container, and synthetic data.

KFF1 layout (little-endian, no padding):

    magic   4 bytes  b"KFF1"
    version u32      1
    N       u64      row count
    D       u64      feature dimension
    namelen u32      byte length of the UTF-8 video name
    name    bytes    video name
    payload N*D float32, row-major

Storage is float32; in-memory matrices are float64. Saving rounds values to
float32, so loading a saved file and saving it again is byte-stable, and the
synthetic generator pre-quantizes its output so even generate -> save -> load
is bit-exact. Frame identifiers are derived from the video name and row index
(``<video>/<000000>``), matching the dataset module's scheme.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from kfid.dataset import make_frame_id
from kfid.errors import DataError, FormatError
from kfid.rng import PortableRng

MAGIC = b"KFF1"
VERSION = 1


@dataclass(frozen=True)
class FeatureMatrix:
    """N x D matrix of per-frame embedding vectors, float64 in memory."""

    video: str
    data: np.ndarray
    frame_ids: tuple[str, ...]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise DataError("feature data must be a 2-D array")
        if data.shape[1] == 0:
            raise DataError("feature dimension must be positive")
        if not np.all(np.isfinite(data)):
            raise DataError("feature data contains non-finite values")
        if len(self.frame_ids) != data.shape[0]:
            raise DataError("frame_ids length does not match row count")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "frame_ids", tuple(self.frame_ids))

    @classmethod
    def from_rows(cls, video: str, data: np.ndarray) -> "FeatureMatrix":
        data = np.asarray(data, dtype=np.float64)
        ids = tuple(make_frame_id(video, i) for i in range(data.shape[0]))
        return cls(video, data, ids)

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def row(self, i: int) -> np.ndarray:
        return self.data[i]


def save_features(matrix: FeatureMatrix, path: str | Path) -> None:
    """Write a KFF1 file; equal matrices produce byte-identical files."""
    if matrix.n_frames == 0:
        raise FormatError("KFF1 cannot store a matrix with zero rows")
    name_bytes = matrix.video.encode("utf-8")
    header = MAGIC + struct.pack(
        "<IQQI", VERSION, matrix.n_frames, matrix.dim, len(name_bytes)
    )
    payload = np.ascontiguousarray(matrix.data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + name_bytes + payload)


def load_features(path: str | Path) -> FeatureMatrix:
    """Read a KFF1 file back into a float64 FeatureMatrix."""
    blob = Path(path).read_bytes()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic, not a KFF1 file")
    if len(blob) < 4 + struct.calcsize("<IQQI"):
        raise FormatError(f"{path}: truncated header")
    version, n, d, name_len = struct.unpack_from("<IQQI", blob, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported KFF1 version {version}")
    if n == 0 or d == 0:
        raise FormatError(f"{path}: N and D must be nonzero (got {n}x{d})")
    offset = 4 + struct.calcsize("<IQQI")
    if len(blob) < offset + name_len:
        raise FormatError(f"{path}: truncated video name")
    video = blob[offset : offset + name_len].decode("utf-8")
    offset += name_len
    expected = n * d * 4
    if len(blob) - offset < expected:
        raise FormatError(f"{path}: truncated payload")
    if len(blob) - offset > expected:
        raise FormatError(f"{path}: trailing data after payload")
    values = np.frombuffer(blob, dtype="<f4", count=n * d, offset=offset)
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: payload contains non-finite values")
    data = values.astype(np.float64).reshape(n, d)
    return FeatureMatrix.from_rows(video, data)


@dataclass(frozen=True)
class SyntheticSpec:
    """Two isotropic Gaussian classes at a controlled mean separation."""

    n_key: int
    n_ordinary: int
    dim: int
    separation: float
    noise_scale: float
    seed: int

    def __post_init__(self):
        if self.n_key < 0 or self.n_ordinary < 0 or self.n_key + self.n_ordinary == 0:
            raise ValueError("need at least one frame")
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.separation < 0:
            raise ValueError("separation must be nonnegative")
        if self.noise_scale <= 0:
            raise ValueError("noise_scale must be positive")


def generate_synthetic(
    spec: SyntheticSpec, video: str = "synthetic"
) -> tuple[FeatureMatrix, list[int]]:
    """Deterministic synthetic features: key rows first, then ordinary rows.

    Key frames are drawn around ``separation`` along the first axis, ordinary
    frames around the origin, both with isotropic noise_scale * N(0, I). All
    values are drawn row by row from the seeded portable RNG and quantized to
    float32 resolution so files round-trip bit-exactly.
    """
    rng = PortableRng(spec.seed)
    n = spec.n_key + spec.n_ordinary
    data = np.empty((n, spec.dim), dtype=np.float64)
    for r in range(n):
        offset = spec.separation if r < spec.n_key else 0.0
        for c in range(spec.dim):
            mean = offset if c == 0 else 0.0
            data[r, c] = mean + spec.noise_scale * rng.next_gaussian()
    data = data.astype(np.float32).astype(np.float64)
    labels = [1] * spec.n_key + [0] * spec.n_ordinary
    return FeatureMatrix.from_rows(video, data), labels
