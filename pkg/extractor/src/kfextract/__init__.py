"""Offline frame and feature extraction for key-frame pipelines."""

from kfextract.errors import DataError, ExtractError, UsageError
from kfextract.features import (
    BACKBONES,
    WEIGHT_MODES,
    ExtractorConfig,
    extract_features,
    extract_to_file,
    load_backbone,
    preprocess_frame,
)
from kfextract.frames import extract_frames, frame_paths
from kfextract.kff import write_features

__version__ = "0.1.0"

__all__ = [
    "BACKBONES",
    "DataError",
    "ExtractError",
    "ExtractorConfig",
    "UsageError",
    "WEIGHT_MODES",
    "extract_features",
    "extract_frames",
    "extract_to_file",
    "frame_paths",
    "load_backbone",
    "preprocess_frame",
    "write_features",
    "__version__",
]
