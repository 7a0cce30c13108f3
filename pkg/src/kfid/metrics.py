"""Confusion counts, precision/recall/F, and per-video report aggregation.

Precision and recall use the standard factor-free ratios (positive class =
key frame = 1); degenerate denominators resolve to 0 so report arithmetic is
total. Internal metric values live in [0, 1]; reports carry them x100 with
two decimals, deltas with three.

Aggregation works on a score table: one entry per (group, model) with F
values per video, plus an optional published average. The headline Average of
a model is its published value when one is given, otherwise the recomputed
mean of its per-video F values; delta rows subtract group means of headline
averages from the ensemble average. Published averages that cannot be
explained by 2-decimal rounding of the per-video values are flagged in the
report notes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

from kfid.errors import DataError, FormatError

GROUP_BASELINE = "baseline"
GROUP_FUSION = "fusion"
GROUP_MEMBER = "member"
GROUP_ENSEMBLE = "ensemble"
_GROUP_ORDER = {GROUP_BASELINE: 0, GROUP_FUSION: 1, GROUP_MEMBER: 2, GROUP_ENSEMBLE: 3}

AVERAGE_ROW = "Average"

# A published 2-decimal average and per-video values each rounded to 2
# decimals can drift apart by at most ~0.01; anything larger is flagged.
_ROUNDING_REACH = 0.0105


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise DataError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(predicted: list[int], actual: list[int]) -> ConfusionCounts:
    """Standard 2x2 counts; raises on empty or mismatched inputs."""
    if len(predicted) != len(actual):
        raise DataError(
            f"length mismatch: {len(predicted)} predictions vs {len(actual)} labels"
        )
    if not predicted:
        raise DataError("confusion of empty inputs")
    tp = fp = fn = tn = 0
    for p, a in zip(predicted, actual):
        if p not in (0, 1) or a not in (0, 1):
            raise DataError(f"labels must be 0 or 1, got ({p!r}, {a!r})")
        if p == 1 and a == 1:
            tp += 1
        elif p == 1 and a == 0:
            fp += 1
        elif p == 0 and a == 1:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, fn, tn)


def precision_recall_f(counts: ConfusionCounts) -> tuple[float, float, float]:
    """(precision, recall, F) in [0, 1]; degenerate denominators give 0."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    if precision + recall == 0.0:
        f = 0.0
    else:
        f = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f


@dataclass(frozen=True)
class VideoScore:
    """Reported-scale (x100) metrics of one model on one video."""

    f: float
    precision: float | None = None
    recall: float | None = None
    counts: ConfusionCounts | None = None


@dataclass
class ModelScores:
    name: str
    group: str
    videos: dict[str, VideoScore]
    published_average: float | None = None


@dataclass
class ModelReport:
    name: str
    group: str
    videos: dict[str, VideoScore]
    average: float
    recomputed_average: float
    published_average: float | None


@dataclass
class EvalReport:
    models: list[ModelReport]
    deltas: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def video_names(self) -> list[str]:
        return sorted(self.models[0].videos) if self.models else []


def scores_from_labels(
    name: str,
    group: str,
    predicted: dict[str, list[int]],
    actual: dict[str, list[int]],
) -> ModelScores:
    """Build a score-table entry from per-video predicted/actual label lists."""
    if set(predicted) != set(actual):
        raise DataError("predicted and actual cover different videos")
    videos = {}
    for video in sorted(predicted):
        counts = confusion(predicted[video], actual[video])
        precision, recall, f = precision_recall_f(counts)
        videos[video] = VideoScore(
            f=100.0 * f,
            precision=100.0 * precision,
            recall=100.0 * recall,
            counts=counts,
        )
    return ModelScores(name, group, videos)


def aggregate_report(scores: list[ModelScores]) -> EvalReport:
    """Average per model over videos, then delta rows against the ensemble."""
    if not scores:
        raise DataError("no scores to aggregate")
    video_set = set(scores[0].videos)
    seen = set()
    for entry in scores:
        if (entry.group, entry.name) in seen:
            raise DataError(f"duplicate model: {entry.group}/{entry.name}")
        seen.add((entry.group, entry.name))
        if set(entry.videos) != video_set:
            raise DataError(
                f"inconsistent video sets: {entry.group}/{entry.name} covers "
                f"{sorted(entry.videos)}, expected {sorted(video_set)}"
            )
        if not entry.videos:
            raise DataError(f"{entry.group}/{entry.name} has no videos")

    notes: list[str] = []
    models: list[ModelReport] = []
    for order, entry in enumerate(scores):
        recomputed = sum(entry.videos[v].f for v in sorted(entry.videos)) / len(
            entry.videos
        )
        average = (
            entry.published_average
            if entry.published_average is not None
            else recomputed
        )
        if entry.published_average is not None:
            gap = abs(entry.published_average - recomputed)
            if gap > _ROUNDING_REACH:
                notes.append(
                    f"{entry.group}/{entry.name}: published average "
                    f"{entry.published_average:.2f} is inconsistent with its "
                    f"per-video values (recomputed {recomputed:.2f})"
                )
        models.append(
            ModelReport(
                entry.name,
                entry.group,
                dict(entry.videos),
                average,
                recomputed,
                entry.published_average,
            )
        )
    models.sort(key=lambda m: (_GROUP_ORDER.get(m.group, len(_GROUP_ORDER)), m.group))

    deltas: dict[str, float] = {}
    ensemble_models = [m for m in models if m.group == GROUP_ENSEMBLE]
    other_groups: dict[str, list[float]] = {}
    for m in models:
        if m.group != GROUP_ENSEMBLE:
            other_groups.setdefault(m.group, []).append(m.average)
    if len(ensemble_models) == 1 and other_groups:
        ensemble_average = ensemble_models[0].average
        for group in sorted(
            other_groups, key=lambda g: (_GROUP_ORDER.get(g, len(_GROUP_ORDER)), g)
        ):
            averages = other_groups[group]
            deltas[f"ensemble_vs_{group}"] = ensemble_average - sum(averages) / len(
                averages
            )
    elif len(ensemble_models) > 1:
        notes.append("multiple ensemble entries: delta rows skipped")
    return EvalReport(models, deltas, notes)


def parse_scores_csv(path: str | Path) -> list[ModelScores]:
    """Read a score table: ``model,group,video,f_score`` rows.

    A row whose video is ``Average`` carries the model's published average
    instead of a per-video value. A leading header row and ``#`` comments are
    skipped.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read scores file: {path}") from exc
    entries: dict[tuple[str, str], ModelScores] = {}
    reader = csv.reader(io.StringIO(text))
    first_data_row = True
    for lineno, row in enumerate(reader, start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if first_data_row:
            first_data_row = False
            if cells == ["model", "group", "video", "f_score"]:
                continue
        if len(cells) != 4:
            raise FormatError(f"{path}:{lineno}: expected 4 fields, got {len(cells)}")
        name, group, video, f_text = cells
        if not name or not group or not video:
            raise FormatError(f"{path}:{lineno}: empty field")
        try:
            f_value = float(f_text)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: bad F value {f_text!r}") from None
        if not 0.0 <= f_value <= 100.0:
            raise FormatError(f"{path}:{lineno}: F value {f_value} outside [0, 100]")
        key = (group.lower(), name)
        entry = entries.setdefault(key, ModelScores(name, group.lower(), {}))
        if video.lower() == AVERAGE_ROW.lower():
            if entry.published_average is not None:
                raise FormatError(f"{path}:{lineno}: duplicate Average row")
            entry.published_average = f_value
        else:
            if video in entry.videos:
                raise FormatError(f"{path}:{lineno}: duplicate video {video}")
            entry.videos[video] = VideoScore(f=f_value)
    return list(entries.values())


def reference_scores_path() -> Path:
    """Bundled score table from the reference GoPro experiment."""
    return Path(__file__).parent / "data" / "reference_scores.csv"


def load_reference_scores() -> list[ModelScores]:
    return parse_scores_csv(reference_scores_path())


def render_text(report: EvalReport) -> str:
    """Plain-text table: videos as rows per model column group, like published
    performance tables, followed by delta and note lines."""
    videos = report.video_names()
    lines = ["Per-video F-scores (x100)", ""]
    header = ["group", "model", *videos, AVERAGE_ROW]
    rows = [header]
    for m in report.models:
        rows.append(
            [m.group, m.name]
            + [f"{m.videos[v].f:.2f}" for v in videos]
            + [f"{m.average:.2f}"]
        )
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    for i, row in enumerate(rows):
        cells = [row[0].ljust(widths[0]), row[1].ljust(widths[1])]
        cells += [row[c].rjust(widths[c]) for c in range(2, len(header))]
        lines.append("  ".join(cells).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    if report.deltas:
        lines += ["", "Deltas (x100)"]
        for key, value in report.deltas.items():
            lines.append(f"  {key} = {value:.3f}")
    if report.notes:
        lines += ["", "Notes"]
        for note in report.notes:
            lines.append(f"  - {note}")
    return "\n".join(lines) + "\n"


def render_csv(report: EvalReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["model", "group", "video", "f", "precision", "recall", "tp", "fp", "fn", "tn"]
    )
    for m in report.models:
        for video in report.video_names():
            score = m.videos[video]
            counts = score.counts
            writer.writerow(
                [
                    m.name,
                    m.group,
                    video,
                    f"{score.f:.2f}",
                    "" if score.precision is None else f"{score.precision:.2f}",
                    "" if score.recall is None else f"{score.recall:.2f}",
                    "" if counts is None else counts.tp,
                    "" if counts is None else counts.fp,
                    "" if counts is None else counts.fn,
                    "" if counts is None else counts.tn,
                ]
            )
        writer.writerow(
            [m.name, m.group, AVERAGE_ROW, f"{m.average:.2f}", "", "", "", "", "", ""]
        )
    return out.getvalue()


def report_to_dict(report: EvalReport) -> dict:
    models = []
    for m in report.models:
        videos = {}
        for video, score in m.videos.items():
            entry: dict = {"f": score.f}
            if score.precision is not None:
                entry["precision"] = score.precision
            if score.recall is not None:
                entry["recall"] = score.recall
            if score.counts is not None:
                entry["counts"] = {
                    "tp": score.counts.tp,
                    "fp": score.counts.fp,
                    "fn": score.counts.fn,
                    "tn": score.counts.tn,
                }
            videos[video] = entry
        models.append(
            {
                "name": m.name,
                "group": m.group,
                "videos": videos,
                "average": m.average,
                "recomputed_average": m.recomputed_average,
                "published_average": m.published_average,
            }
        )
    return {"models": models, "deltas": report.deltas, "notes": report.notes}


def report_from_dict(payload: dict) -> EvalReport:
    try:
        models = []
        for m in payload["models"]:
            videos = {}
            for video, entry in m["videos"].items():
                counts = entry.get("counts")
                videos[video] = VideoScore(
                    f=float(entry["f"]),
                    precision=entry.get("precision"),
                    recall=entry.get("recall"),
                    counts=None
                    if counts is None
                    else ConfusionCounts(
                        counts["tp"], counts["fp"], counts["fn"], counts["tn"]
                    ),
                )
            models.append(
                ModelReport(
                    m["name"],
                    m["group"],
                    videos,
                    float(m["average"]),
                    float(m["recomputed_average"]),
                    m.get("published_average"),
                )
            )
        return EvalReport(models, dict(payload.get("deltas", {})), list(payload.get("notes", [])))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed report payload: {exc}") from exc
