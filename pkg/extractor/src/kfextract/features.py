"""Frozen-backbone feature extraction over decoded frames.

Frames are resized, normalized with the standard image statistics, optionally
flipped (training-extraction mode only), and pushed through a frozen
pretrained network; the penultimate-layer activations become one row per
frame, in index order. Evaluation mode has no randomness at all, so repeated
runs on the same device agree to well under 1e-5 per value.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import cv2
import numpy as np

from kfextract.errors import DataError, UsageError
from kfextract.frames import frame_paths
from kfextract.kff import write_features

BACKBONES = ("resnet50", "vit_b16")
WEIGHT_MODES = ("pretrained", "none")


@dataclass(frozen=True)
class ExtractorConfig:
    """Preprocessing and inference settings for one extraction run."""

    backbone: str = "resnet50"
    weights: str = "pretrained"
    resize: tuple[int, int] = (224, 224)
    normalize_mean: tuple[float, float, float] = (0.485, 0.456, 0.406)
    normalize_std: tuple[float, float, float] = (0.229, 0.224, 0.225)
    horizontal_flip_prob: float = 0.5
    train_mode: bool = False
    batch_size: int = 16
    device: str = "cpu"
    seed: int = 0

    def __post_init__(self):
        if self.backbone not in BACKBONES:
            raise UsageError(
                f"unknown backbone {self.backbone!r}; choose from {BACKBONES}"
            )
        if self.weights not in WEIGHT_MODES:
            raise UsageError(
                f"unknown weight mode {self.weights!r}; choose from {WEIGHT_MODES}"
            )
        if len(self.resize) != 2 or min(self.resize) <= 0:
            raise UsageError("resize must be a pair of positive sizes")
        if not 0.0 <= self.horizontal_flip_prob <= 1.0:
            raise UsageError("flip probability must lie in [0, 1]")
        if self.batch_size <= 0:
            raise UsageError("batch size must be positive")

    @property
    def effective_flip_prob(self) -> float:
        """Evaluation extraction forces the flip probability to zero."""
        return self.horizontal_flip_prob if self.train_mode else 0.0


def _build_resnet50(weights_arg):
    import torch
    import torchvision.models as tvm

    model = tvm.resnet50(weights=weights_arg)
    dim = model.fc.in_features
    model.fc = torch.nn.Identity()
    return model, dim


def _build_vit_b16(weights_arg):
    import torch
    import torchvision.models as tvm

    model = tvm.vit_b_16(weights=weights_arg)
    dim = model.heads.head.in_features
    model.heads = torch.nn.Identity()
    return model, dim


_BUILDERS = {"resnet50": _build_resnet50, "vit_b16": _build_vit_b16}

_PRETRAINED_TAGS = {
    "resnet50": ("ResNet50_Weights", "IMAGENET1K_V2"),
    "vit_b16": ("ViT_B_16_Weights", "IMAGENET1K_V1"),
}


@lru_cache(maxsize=4)
def _cached_backbone(backbone: str, weights: str, seed: int, device: str):
    import torch
    import torchvision.models as tvm

    if weights == "pretrained":
        enum_name, tag = _PRETRAINED_TAGS[backbone]
        weights_arg = getattr(getattr(tvm, enum_name), tag)
    else:
        weights_arg = None
        # deterministic fallback initialization when no weights are available
        torch.manual_seed(seed)
    try:
        model, dim = _BUILDERS[backbone](weights_arg)
    except Exception as exc:
        raise DataError(
            f"backbone weights for {backbone!r} are not available: {exc}"
        ) from exc
    model.eval()
    model.requires_grad_(False)
    try:
        model.to(torch.device(device))
    except Exception as exc:
        raise UsageError(f"cannot use device {device!r}: {exc}") from exc
    return model, dim


def load_backbone(config: ExtractorConfig):
    """Return (frozen model, penultimate width) for the configured backbone."""
    seed = config.seed if config.weights == "none" else 0
    return _cached_backbone(config.backbone, config.weights, seed, config.device)


def preprocess_frame(
    image: np.ndarray, config: ExtractorConfig, flip: bool
) -> np.ndarray:
    """BGR frame -> normalized CHW float32 tensor data."""
    if image.ndim == 2:
        image = cv2.cvtColor(image, cv2.COLOR_GRAY2BGR)
    rgb = cv2.cvtColor(image, cv2.COLOR_BGR2RGB)
    resized = cv2.resize(rgb, config.resize, interpolation=cv2.INTER_LINEAR)
    if flip:
        resized = resized[:, ::-1]
    scaled = resized.astype(np.float32) / 255.0
    mean = np.asarray(config.normalize_mean, dtype=np.float32)
    std = np.asarray(config.normalize_std, dtype=np.float32)
    normalized = (scaled - mean) / std
    return np.ascontiguousarray(normalized.transpose(2, 0, 1))


def extract_features(
    frame_dir: str | Path, config: ExtractorConfig
) -> tuple[np.ndarray, list[str]]:
    """Embed every frame in index order; returns (N x D matrix, frame names)."""
    import torch

    paths = frame_paths(frame_dir)
    model, dim = load_backbone(config)
    flip_rng = random.Random(config.seed)
    flip_prob = config.effective_flip_prob
    tensors = []
    for path in paths:
        image = cv2.imread(str(path), cv2.IMREAD_COLOR)
        if image is None:
            raise DataError(f"cannot read frame image: {path}")
        flip = flip_prob > 0.0 and flip_rng.random() < flip_prob
        tensors.append(preprocess_frame(image, config, flip))
    rows = []
    device = torch.device(config.device)
    with torch.no_grad():
        for start in range(0, len(tensors), config.batch_size):
            batch = torch.from_numpy(
                np.stack(tensors[start : start + config.batch_size])
            ).to(device)
            out = model(batch).cpu().numpy()
            if out.ndim != 2 or out.shape[1] != dim:
                raise DataError(
                    f"backbone produced shape {out.shape}, expected (*, {dim})"
                )
            rows.append(out)
    features = np.concatenate(rows).astype(np.float64)
    return features, [path.name for path in paths]


def extract_to_file(
    frame_dir: str | Path,
    out_path: str | Path,
    config: ExtractorConfig,
    video: str | None = None,
) -> int:
    """Extract features and write them as a KFF1 container; returns N."""
    features, _ = extract_features(frame_dir, config)
    if video is None:
        video = Path(frame_dir).name
    write_features(out_path, video, features)
    return features.shape[0]
