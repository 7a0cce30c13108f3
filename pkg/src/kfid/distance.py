"""Anchor selection, the deep distance, and fusion-feature construction.

The deep distance of a frame is computed against K anchor frames sampled once
from the labeled key frames: take the componentwise absolute difference
against each anchor (a K x D matrix), then average over the K rows. The
fusion feature is the raw feature vector concatenated with that length-D
distance, giving 2D components. Anchors are drawn from the training split and
frozen for the whole run; a frame that is itself an anchor keeps its zero row
in the average.

Row averaging sums anchors in ascending row order; together with the kernel
backends this makes fused outputs bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from kfid import kernels
from kfid.errors import DataError, FormatError
from kfid.features import FeatureMatrix, load_features, save_features
from kfid.rng import PortableRng

DEFAULT_ANCHOR_COUNT = 32


@dataclass(frozen=True)
class AnchorSet:
    """K key-frame feature vectors the deep distance is measured against."""

    vectors: np.ndarray
    source_frame_ids: tuple[str, ...]
    seed: int
    k: int

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise DataError("anchor vectors must form a 2-D array")
        if vectors.shape[0] != self.k or self.k <= 0:
            raise DataError("anchor count does not match k")
        if len(self.source_frame_ids) != self.k:
            raise DataError("source_frame_ids length does not match k")
        if not np.all(np.isfinite(vectors)):
            raise DataError("anchor vectors contain non-finite values")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "source_frame_ids", tuple(self.source_frame_ids))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def select_anchors(
    features: FeatureMatrix,
    labels: list[int],
    k: int = DEFAULT_ANCHOR_COUNT,
    seed: int = 0,
) -> AnchorSet:
    """Sample k distinct key frames uniformly without replacement.

    Selection uses the seeded portable RNG over the key-frame rows in row
    order; the chosen rows are kept in ascending row order so the anchor set
    is canonical for a given (features, labels, k, seed).
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if len(labels) != features.n_frames:
        raise DataError("labels are not aligned with feature rows")
    key_rows = [i for i, label in enumerate(labels) if label == 1]
    if len(key_rows) < k:
        raise DataError(
            f"need at least {k} key frames for anchors, found {len(key_rows)}"
        )
    rng = PortableRng(seed)
    chosen = [key_rows[i] for i in rng.sample_indices(len(key_rows), k)]
    vectors = np.ascontiguousarray(features.data[chosen])
    ids = tuple(features.frame_ids[i] for i in chosen)
    return AnchorSet(vectors, ids, seed, k)


def deep_distance_matrix(frame: np.ndarray, anchors: AnchorSet) -> np.ndarray:
    """K x D matrix of componentwise absolute differences against each anchor."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 1 or frame.shape[0] != anchors.dim:
        raise DataError(
            f"dimension mismatch: frame is {frame.shape}, anchors are {anchors.dim}-d"
        )
    return np.abs(frame[np.newaxis, :] - anchors.vectors)


def deep_distance(matrix: np.ndarray) -> np.ndarray:
    """Row average of a distance matrix, summed in fixed row order."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise DataError("distance matrix must have at least one row")
    acc = matrix[0].copy()
    for j in range(1, matrix.shape[0]):
        acc += matrix[j]
    return acc / matrix.shape[0]


def fuse(raw: np.ndarray, deep: np.ndarray) -> np.ndarray:
    """Concatenate raw features with the deep distance; no rescaling."""
    raw = np.asarray(raw, dtype=np.float64)
    deep = np.asarray(deep, dtype=np.float64)
    if raw.shape != deep.shape or raw.ndim != 1:
        raise DataError(
            f"dimension mismatch: raw is {raw.shape}, deep is {deep.shape}"
        )
    return np.concatenate([raw, deep])


def fuse_dataset(features: FeatureMatrix, anchors: AnchorSet) -> FeatureMatrix:
    """Fuse every row against the anchor set; ids and order are preserved."""
    if features.dim != anchors.dim:
        raise DataError(
            f"dimension mismatch: features are {features.dim}-d, "
            f"anchors are {anchors.dim}-d"
        )
    fused = kernels.fused_matrix(features.data, anchors.vectors)
    return FeatureMatrix(features.video, fused, features.frame_ids)


def save_anchors(anchors: AnchorSet, path: str | Path) -> None:
    """Store anchors as a KFF1 file plus a ``.meta`` text sidecar."""
    path = Path(path)
    matrix = FeatureMatrix("anchors", anchors.vectors, anchors.source_frame_ids)
    save_features(matrix, path)
    lines = [f"seed={anchors.seed}", f"k={anchors.k}"]
    lines += [f"source={frame_id}" for frame_id in anchors.source_frame_ids]
    Path(str(path) + ".meta").write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_anchors(path: str | Path) -> AnchorSet:
    path = Path(path)
    matrix = load_features(path)
    meta_path = Path(str(path) + ".meta")
    try:
        meta_text = meta_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"missing anchor sidecar: {meta_path}") from exc
    seed = None
    k = None
    sources: list[str] = []
    for raw in meta_text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"{meta_path}: malformed line {line!r}")
        if key == "seed":
            seed = int(value)
        elif key == "k":
            k = int(value)
        elif key == "source":
            sources.append(value)
        else:
            raise FormatError(f"{meta_path}: unknown key {key!r}")
    if seed is None or k is None:
        raise FormatError(f"{meta_path}: seed and k are required")
    if len(sources) != k or matrix.n_frames != k:
        raise FormatError(f"{meta_path}: source count does not match k")
    return AnchorSet(matrix.data, tuple(sources), seed, k)
