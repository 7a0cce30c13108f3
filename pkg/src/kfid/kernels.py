"""Fusion-kernel backend selection.

Imports the compiled Cython kernel when it was built, otherwise the numpy
fallback. Both implement the same fixed accumulation order, so results are
bit-identical either way; BACKEND records which one is active.
"""

from __future__ import annotations

import numpy as np

from kfid.errors import DataError

try:
    from kfid._fusion_cy import fused_matrix as _fused_matrix

    BACKEND = "compiled"
except ImportError:
    from kfid._fusion_py import fused_matrix as _fused_matrix

    BACKEND = "fallback"


def fused_matrix(feats: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """N x 2D fusion matrix: raw rows beside their anchor-averaged distances."""
    feats = np.ascontiguousarray(feats, dtype=np.float64)
    anchors = np.ascontiguousarray(anchors, dtype=np.float64)
    if feats.ndim != 2 or anchors.ndim != 2:
        raise DataError("fused_matrix expects 2-D arrays")
    if anchors.shape[0] == 0:
        raise DataError("anchor set is empty")
    if feats.shape[1] != anchors.shape[1]:
        raise DataError(
            f"dimension mismatch: frames are {feats.shape[1]}-d, "
            f"anchors are {anchors.shape[1]}-d"
        )
    return _fused_matrix(feats, anchors)
