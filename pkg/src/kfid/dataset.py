"""Video manifest, frame labels, and train/validation/test split bookkeeping.

A manifest is a line-oriented UTF-8 text file, one video per line:

    name,size_mb,split,frame_count,label_path

with ``#`` comments and blank lines ignored. ``split`` is one of ``train``,
``validation``, ``test`` (case-insensitive on input). ``label_path`` is
resolved relative to the manifest file; ``-`` means no label file. A label
file has one ``frame_index,label`` line per frame with label 0 (ordinary
frame) or 1 (key frame).

Frame identifiers are ``<video-name>/<zero-padded 6-digit frame index>``,
which keeps lexicographic order equal to frame order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

from kfid.errors import DataError, FormatError

_DATA_DIR = Path(__file__).parent / "data"


class Split(enum.Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"

    @classmethod
    def parse(cls, text: str) -> "Split":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise FormatError(f"invalid split tag: {text!r}") from None


def make_frame_id(video: str, index: int) -> str:
    if index < 0:
        raise ValueError("frame index must be nonnegative")
    return f"{video}/{index:06d}"


def parse_frame_id(frame_id: str) -> tuple[str, int]:
    video, sep, index = frame_id.rpartition("/")
    if not sep or not index.isdigit():
        raise DataError(f"malformed frame identifier: {frame_id!r}")
    return video, int(index)


def validate_label(value: int) -> int:
    """Frame labels are strictly 0 (ordinary) or 1 (key); nothing else parses."""
    if value not in (0, 1):
        raise DataError(f"frame label must be 0 or 1, got {value!r}")
    return value


@dataclass(frozen=True)
class VideoEntry:
    name: str
    memory_size_mb: float
    split: Split
    frame_count: int = 0
    label_source: str = "-"

    def __post_init__(self):
        if not self.name or "/" in self.name or "," in self.name:
            raise DataError(f"invalid video name: {self.name!r}")
        if self.memory_size_mb < 0:
            raise DataError(f"negative memory size for {self.name}")
        if self.frame_count < 0:
            raise DataError(f"negative frame count for {self.name}")


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[VideoEntry, ...]
    labels: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        names = [e.name for e in self.entries]
        seen = set()
        for name in names:
            if name in seen:
                raise DataError(f"duplicate video name: {name}")
            seen.add(name)
        for frame_id, label in self.labels.items():
            video, _ = parse_frame_id(frame_id)
            if video not in seen:
                raise DataError(f"label references unknown video: {frame_id}")
            validate_label(label)

    def entry(self, name: str) -> VideoEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise DataError(f"unknown video: {name}")

    def split_names(self, split: Split) -> list[str]:
        return [e.name for e in self.entries if e.split is split]

    def split_counts(self) -> dict[Split, int]:
        counts = {s: 0 for s in Split}
        for e in self.entries:
            counts[e.split] += 1
        return counts


def load_manifest(path: str | Path) -> DatasetManifest:
    """Parse a manifest file and the label files it references."""
    path = Path(path)
    entries: list[VideoEntry] = []
    labels: dict[str, int] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read manifest: {path}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise FormatError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
        name, size_text, split_text, count_text, label_path = (p.strip() for p in parts)
        try:
            size_mb = float(size_text)
            frame_count = int(count_text)
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        entries.append(
            VideoEntry(name, size_mb, Split.parse(split_text), frame_count, label_path)
        )
        if label_path not in ("", "-"):
            file_labels = load_labels(path.parent / label_path)
            for index, value in file_labels.items():
                labels[make_frame_id(name, index)] = value
    return DatasetManifest(tuple(entries), labels)


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Write the canonical manifest form; load_manifest round-trips it."""
    lines = ["# name,size_mb,split,frame_count,label_path"]
    for e in manifest.entries:
        lines.append(
            f"{e.name},{e.memory_size_mb!r},{e.split.value},{e.frame_count},{e.label_source}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_labels(path: str | Path) -> dict[int, int]:
    """Read one video's ``frame_index,label`` file into an index->label map."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read label file: {path}") from exc
    labels: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'frame_index,label'")
        try:
            index = int(parts[0])
            value = int(parts[1])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-integer field") from None
        if index < 0:
            raise FormatError(f"{path}:{lineno}: negative frame index")
        if index in labels:
            raise FormatError(f"{path}:{lineno}: duplicate frame index {index}")
        try:
            labels[index] = validate_label(value)
        except DataError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
    return labels


def save_labels(labels: list[int] | dict[int, int], path: str | Path) -> None:
    if isinstance(labels, dict):
        items = sorted(labels.items())
    else:
        items = list(enumerate(labels))
    lines = [f"{index},{validate_label(value)}" for index, value in items]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def average_memory_size(manifest: DatasetManifest) -> float:
    """Arithmetic mean of the entries' sizes in MB."""
    if not manifest.entries:
        raise DataError("average_memory_size of an empty manifest")
    return sum(e.memory_size_mb for e in manifest.entries) / len(manifest.entries)


def split_frames(manifest: DatasetManifest, split: Split) -> list[tuple[str, int]]:
    """Labeled frames of the requested split, manifest order then frame order."""
    by_video: dict[str, list[tuple[int, int]]] = {}
    for frame_id, label in manifest.labels.items():
        video, index = parse_frame_id(frame_id)
        by_video.setdefault(video, []).append((index, label))
    result: list[tuple[str, int]] = []
    for entry in manifest.entries:
        if entry.split is not split:
            continue
        for index, label in sorted(by_video.get(entry.name, [])):
            result.append((make_frame_id(entry.name, index), label))
    return result


def reference_manifest_path() -> Path:
    """Bundled manifest of the 18-video milking-parlor corpus (13/2/3 split)."""
    return _DATA_DIR / "reference_manifest.txt"


def load_reference_manifest() -> DatasetManifest:
    return load_manifest(reference_manifest_path())
