"""Video decoding: one lossless image per frame plus an order-defining index.

The index file is written last via an atomic rename, so a failed extraction
never leaves a partial index behind; any stale index from a previous run is
removed up front for the same reason.
"""

from __future__ import annotations

import os
from pathlib import Path

import cv2

from kfextract.errors import DataError

INDEX_NAME = "index.txt"


def extract_frames(video_path: str | Path, out_dir: str | Path) -> list[str]:
    """Decode every frame to <out_dir>/<000000>.png and return the file names."""
    video_path = Path(video_path)
    out_dir = Path(out_dir)
    capture = cv2.VideoCapture(str(video_path))
    if not capture.isOpened():
        raise DataError(f"cannot decode video: {video_path}")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / INDEX_NAME).unlink(missing_ok=True)
    names: list[str] = []
    try:
        while True:
            ok, frame = capture.read()
            if not ok:
                break
            name = f"{len(names):06d}.png"
            if not cv2.imwrite(str(out_dir / name), frame):
                raise DataError(f"cannot write frame image: {out_dir / name}")
            names.append(name)
    finally:
        capture.release()
    if not names:
        raise DataError(f"no frames decoded from {video_path}")
    tmp_path = out_dir / (INDEX_NAME + ".tmp")
    tmp_path.write_text("".join(name + "\n" for name in names), encoding="utf-8")
    os.replace(tmp_path, out_dir / INDEX_NAME)
    return names


def frame_paths(frame_dir: str | Path) -> list[Path]:
    """Frames in index order, or sorted image files when no index exists."""
    frame_dir = Path(frame_dir)
    index_path = frame_dir / INDEX_NAME
    if index_path.is_file():
        paths = [
            frame_dir / line.strip()
            for line in index_path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        for path in paths:
            if not path.is_file():
                raise DataError(f"indexed frame is missing: {path}")
    else:
        paths = sorted(
            p for p in frame_dir.glob("*") if p.suffix.lower() in (".png", ".jpg")
        )
    if not paths:
        raise DataError(f"no frames found in {frame_dir}")
    return paths
