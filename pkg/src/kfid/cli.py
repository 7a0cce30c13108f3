"""Command-line front end for the key-frame identification pipeline.

Subcommands cover the full loop: ``gen-synthetic`` writes labelled feature
files, ``fuse`` augments them with anchor distances, ``train`` fits the
voting-ensemble members, ``predict`` scores frames, ``evaluate`` builds the
per-video report (from a live pipeline or a recorded score table), and
``report`` re-renders a saved JSON report.

Conventions:
  * stdout carries report text only; progress and warnings go to stderr
  * exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric error
  * option precedence: command line > --config file > built-in default
  * identical inputs and seeds give byte-identical outputs

A config file holds ``key=value`` lines (``#`` comments allowed) where keys
are the long option names of the tuning knobs, e.g. ``k=32`` or
``learning-rate=0.01``. Path options are command-line only.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from kfid import classifier, dataset, distance, ensemble, features, metrics
from kfid.errors import DataError, FormatError, NumericError, UsageError

_PROG = "kfid"
_VERSION = "0.1.0"

# Tuning knobs each subcommand accepts from a config file, with their type
# and built-in default. Resolution order: CLI > config > default.
_CONFIG_KEYS: dict[str, dict[str, tuple[type, object]]] = {
    "gen-synthetic": {
        "dim": (int, 16),
        "separation": (float, 4.0),
        "noise-scale": (float, 1.0),
        "train-key": (int, 50),
        "train-ordinary": (int, 50),
        "test-key": (int, 25),
        "test-ordinary": (int, 25),
        "seed": (int, 0),
    },
    "fuse": {
        "k": (int, distance.DEFAULT_ANCHOR_COUNT),
        "seed": (int, 0),
    },
    "train": {
        "members": (int, 5),
        "seed": (int, 0),
        "member-seeds": (str, ""),
        "learning-rate": (float, 0.00003),
        "weight-decay": (float, 0.01),
        "epochs": (int, 100),
        "batch-size": (int, 16),
        "optimizer": (str, classifier.OPTIMIZER_ADAPTIVE),
        "kind": (str, classifier.KIND_LINEAR),
        "hidden": (int, 16),
    },
    "predict": {
        "threshold": (float, 0.5),
    },
    "evaluate": {
        "threshold": (float, 0.5),
    },
    "report": {},
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports bad usage through the exit-code contract."""

    def error(self, message):
        raise UsageError(message)


def _load_config(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {path}") from exc
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not key:
            raise UsageError(f"{path}:{lineno}: empty key")
        if key in values:
            raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def _resolve(args: argparse.Namespace, command: str) -> argparse.Namespace:
    """Merge CLI values, config-file values, and defaults for the knobs."""
    spec = _CONFIG_KEYS[command]
    config_values = _load_config(args.config) if getattr(args, "config", None) else {}
    for key in config_values:
        if key not in spec:
            raise UsageError(f"unknown config key {key!r} for {command}")
    out = {}
    for key, (typ, default) in spec.items():
        attr = key.replace("-", "_")
        cli_value = getattr(args, attr)
        if cli_value is not None:
            out[attr] = cli_value
        elif key in config_values:
            try:
                out[attr] = typ(config_values[key])
            except ValueError:
                raise UsageError(
                    f"bad config value for {key}: {config_values[key]!r}"
                ) from None
        else:
            out[attr] = default
    return argparse.Namespace(**out)


def _labels_for(matrix: features.FeatureMatrix, path: str) -> list[int]:
    """Align a frame_index,label file with the rows of a feature matrix."""
    table = dataset.load_labels(path)
    labels = []
    for frame_id in matrix.frame_ids:
        _, index = dataset.parse_frame_id(frame_id)
        if index not in table:
            raise DataError(f"no label for frame {frame_id} in {path}")
        labels.append(table[index])
    return labels


def _load_heads(path: str) -> list[classifier.ClassifierHead]:
    """One .kfh file, or a directory of them in sorted name order."""
    target = Path(path)
    if target.is_dir():
        head_files = sorted(p for p in target.iterdir() if p.suffix == ".kfh")
        if not head_files:
            raise DataError(f"no .kfh classifier heads in {path}")
    else:
        head_files = [target]
    return [classifier.load_head(p) for p in head_files]


def _emit(text: str, out: str | None) -> None:
    sys.stdout.write(text)
    if out and out != "-":
        Path(out).write_text(text, encoding="utf-8")


def _cmd_gen_synthetic(args, opts) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    splits = (
        ("train", opts.train_key, opts.train_ordinary, opts.seed),
        ("test", opts.test_key, opts.test_ordinary, opts.seed + 1),
    )
    for split, n_key, n_ordinary, seed in splits:
        if n_key == 0:
            print(f"warning: {split} split has no key frames", file=sys.stderr)
        if n_ordinary == 0:
            print(f"warning: {split} split has no ordinary frames", file=sys.stderr)
        try:
            spec = features.SyntheticSpec(
                n_key=n_key,
                n_ordinary=n_ordinary,
                dim=opts.dim,
                separation=opts.separation,
                noise_scale=opts.noise_scale,
                seed=seed,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        matrix, labels = features.generate_synthetic(spec, video=split)
        features.save_features(matrix, out_dir / f"{split}.kff")
        dataset.save_labels(labels, out_dir / f"{split}_labels.csv")
        print(
            f"wrote {split}: {n_key} key + {n_ordinary} ordinary frames, "
            f"dim {opts.dim}, seed {seed}",
            file=sys.stderr,
        )
    return 0


def _cmd_fuse(args, opts) -> int:
    if (args.anchors is None) == (args.labels is None):
        raise UsageError("provide exactly one of --anchors and --labels")
    matrix = features.load_features(args.features)
    if args.anchors is not None:
        anchors = distance.load_anchors(args.anchors)
    else:
        labels = _labels_for(matrix, args.labels)
        anchors = distance.select_anchors(matrix, labels, k=opts.k, seed=opts.seed)
        print(f"selected {anchors.k} anchors (seed {anchors.seed})", file=sys.stderr)
    fused = distance.fuse_dataset(matrix, anchors)
    features.save_features(fused, args.out)
    if args.save_anchors:
        distance.save_anchors(anchors, args.save_anchors)
    print(
        f"wrote {args.out}: {fused.n_frames} frames, dim {fused.dim}",
        file=sys.stderr,
    )
    return 0


def _parse_member_seeds(text: str, members: int, base_seed: int) -> list[int]:
    if not text:
        return [base_seed + i for i in range(members)]
    try:
        seeds = [int(token.strip()) for token in text.split(",") if token.strip()]
    except ValueError:
        raise UsageError(f"bad --member-seeds value: {text!r}") from None
    if len(seeds) != members:
        raise UsageError(f"--member-seeds lists {len(seeds)} seeds for {members} members")
    return seeds


def _cmd_train(args, opts) -> int:
    if opts.kind not in (classifier.KIND_LINEAR, classifier.KIND_ONE_HIDDEN):
        raise UsageError(f"invalid kind: {opts.kind!r}")
    if opts.optimizer not in (classifier.OPTIMIZER_SGD, classifier.OPTIMIZER_ADAPTIVE):
        raise UsageError(f"invalid optimizer: {opts.optimizer!r}")
    if opts.members < 1:
        raise UsageError("--members must be at least 1")
    matrix = features.load_features(args.features)
    labels = _labels_for(matrix, args.labels)
    seeds = _parse_member_seeds(opts.member_seeds, opts.members, opts.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_lines = ["member,epoch,loss"]
    for i, seed in enumerate(seeds):
        try:
            config = classifier.TrainConfig(
                learning_rate=opts.learning_rate,
                weight_decay=opts.weight_decay,
                epochs=opts.epochs,
                batch_size=opts.batch_size,
                seed=seed,
                optimizer=opts.optimizer,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        result = classifier.train(
            matrix, labels, config, kind=opts.kind, hidden_units=opts.hidden
        )
        classifier.save_head(result.head, out_dir / f"member_{i:02d}.kfh")
        for epoch, loss in enumerate(result.epoch_losses):
            log_lines.append(f"{i},{epoch},{loss:.17g}")
        print(
            f"member {i:02d}: seed {seed}, final loss {result.epoch_losses[-1]:.6f}",
            file=sys.stderr,
        )
    (out_dir / "training_log.csv").write_text(
        "\n".join(log_lines) + "\n", encoding="utf-8"
    )
    print(f"wrote {opts.members} heads to {out_dir}", file=sys.stderr)
    return 0


def _cmd_predict(args, opts) -> int:
    heads = _load_heads(args.heads)
    matrix = features.load_features(args.features)
    predictions, member_labels = ensemble.run_ensemble(
        heads, matrix, threshold=opts.threshold
    )
    lines = ["frame_id,score,label,votes"]
    for row, prediction in enumerate(predictions):
        votes = "".join(str(member_labels[m][row]) for m in range(len(heads)))
        lines.append(
            f"{prediction.frame_id},{prediction.score:.6f},{prediction.label},{votes}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    print(
        f"predicted {len(predictions)} frames with {len(heads)} members",
        file=sys.stderr,
    )
    return 0


def _cmd_evaluate(args, opts) -> int:
    replay_source = None
    if args.reference:
        if args.from_scores:
            raise UsageError("--reference and --from-scores are exclusive")
        replay_source = metrics.reference_scores_path()
    elif args.from_scores:
        replay_source = args.from_scores

    if replay_source is not None:
        if args.video:
            raise UsageError("score replay cannot be combined with --video")
        scores = metrics.parse_scores_csv(replay_source)
    else:
        if not args.video:
            raise UsageError(
                "provide --video NAME FEATURES LABELS (repeatable), "
                "--from-scores, or --reference"
            )
        if not args.heads:
            raise UsageError("--video mode requires --heads")
        heads = _load_heads(args.heads)
        member_predicted: dict[int, dict[str, list[int]]] = {
            i: {} for i in range(len(heads))
        }
        ensemble_predicted: dict[str, list[int]] = {}
        actual: dict[str, list[int]] = {}
        for name, features_path, labels_path in args.video:
            if name in actual:
                raise UsageError(f"duplicate --video name: {name}")
            matrix = features.load_features(features_path)
            labels = _labels_for(matrix, labels_path)
            predictions, member_labels = ensemble.run_ensemble(
                heads, matrix, threshold=opts.threshold
            )
            ensemble_predicted[name] = [p.label for p in predictions]
            actual[name] = labels
            for i, labelled in enumerate(member_labels):
                member_predicted[i][name] = labelled
        scores = [
            metrics.scores_from_labels(
                f"member_{i:02d}", metrics.GROUP_MEMBER, member_predicted[i], actual
            )
            for i in range(len(heads))
        ]
        scores.append(
            metrics.scores_from_labels(
                "majority-vote", metrics.GROUP_ENSEMBLE, ensemble_predicted, actual
            )
        )

    report = metrics.aggregate_report(scores)
    _emit(_render(report, args.format), args.out)
    return 0


def _render(report: metrics.EvalReport, fmt: str) -> str:
    if fmt == "text":
        return metrics.render_text(report)
    if fmt == "csv":
        return metrics.render_csv(report)
    return json.dumps(metrics.report_to_dict(report), indent=2, sort_keys=True) + "\n"


def _cmd_report(args, opts) -> int:
    try:
        payload = json.loads(Path(args.path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read report file: {args.path}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{args.path}: not valid JSON: {exc}") from None
    report = metrics.report_from_dict(payload)
    _emit(_render(report, args.format), args.out)
    return 0


_HANDLERS = {
    "gen-synthetic": _cmd_gen_synthetic,
    "fuse": _cmd_fuse,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "report": _cmd_report,
}


def build_parser() -> _Parser:
    parser = _Parser(prog=_PROG, description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version", action="version", version=f"{_PROG} {_VERSION}"
    )
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="key=value file of tuning knobs")
        return p

    p = add("gen-synthetic", "write labelled synthetic train/test feature files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dim", type=int)
    p.add_argument("--separation", type=float)
    p.add_argument("--noise-scale", type=float)
    p.add_argument("--train-key", type=int)
    p.add_argument("--train-ordinary", type=int)
    p.add_argument("--test-key", type=int)
    p.add_argument("--test-ordinary", type=int)
    p.add_argument("--seed", type=int)

    p = add("fuse", "append anchor-distance features to a feature file")
    p.add_argument("--features", required=True, help="input .kff file")
    p.add_argument("--out", required=True, help="output .kff file")
    p.add_argument("--labels", help="label file, to select fresh anchors")
    p.add_argument("--anchors", help="anchor .kff file from a previous run")
    p.add_argument("--save-anchors", help="write the selected anchors here")
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)

    p = add("train", "train the voting-ensemble member classifiers")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--members", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--member-seeds", help="comma-separated seed per member")
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--weight-decay", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument(
        "--optimizer",
        choices=[classifier.OPTIMIZER_SGD, classifier.OPTIMIZER_ADAPTIVE],
    )
    p.add_argument(
        "--kind", choices=[classifier.KIND_LINEAR, classifier.KIND_ONE_HIDDEN]
    )
    p.add_argument("--hidden", type=int)

    p = add("predict", "score frames with a trained ensemble")
    p.add_argument("--features", required=True)
    p.add_argument("--heads", required=True, help=".kfh file or directory of them")
    p.add_argument("--out", required=True, help="output CSV path, - for stdout")
    p.add_argument("--threshold", type=float)

    p = add("evaluate", "build the per-video precision/recall/F report")
    p.add_argument("--from-scores", help="replay a model,group,video,f_score table")
    p.add_argument(
        "--reference",
        action="store_true",
        help="replay the bundled reference score table",
    )
    p.add_argument(
        "--video",
        nargs=3,
        action="append",
        metavar=("NAME", "FEATURES", "LABELS"),
        help="evaluate the ensemble on this video (repeatable)",
    )
    p.add_argument("--heads", help=".kfh file or directory, for --video mode")
    p.add_argument("--threshold", type=float)
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--out", help="also write the report to this file")

    p = add("report", "re-render a saved JSON report")
    p.add_argument("path", help="report JSON written by evaluate --format json")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--out", help="also write the rendering to this file")

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        opts = _resolve(args, args.command)
        return _HANDLERS[args.command](args, opts)
    except SystemExit as exc:  # argparse --help/--version
        return 0 if exc.code in (0, None) else 1
    except UsageError as exc:
        print(f"{_PROG}: error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"{_PROG}: error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"{_PROG}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{_PROG}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
