"""Command-line entry point.

Two subcommands mirror the two pipeline stages: extract-frames decodes a
video into per-frame images plus an index, extract-features embeds an
extracted frame directory into a KFF1 container. Progress goes to stderr;
exit codes are 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys

from kfextract.errors import DataError, UsageError
from kfextract.features import (
    BACKBONES,
    WEIGHT_MODES,
    ExtractorConfig,
    extract_to_file,
)
from kfextract.frames import extract_frames

_PROG = "kfextract"
_VERSION = "0.1.0"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A002 - argparse hook
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog=_PROG, description=__doc__)
    parser.add_argument("--version", action="version", version=f"{_PROG} {_VERSION}")
    commands = parser.add_subparsers(dest="command")

    frames = commands.add_parser(
        "extract-frames", help="decode a video into per-frame images"
    )
    frames.add_argument("video", help="input video file")
    frames.add_argument("out", help="output frame directory")

    feats = commands.add_parser(
        "extract-features", help="embed a frame directory into a KFF1 file"
    )
    feats.add_argument("frames", help="frame directory (from extract-frames)")
    feats.add_argument("out", help="output .kff path")
    feats.add_argument("--backbone", default="resnet50", choices=BACKBONES)
    feats.add_argument(
        "--weights",
        default="pretrained",
        choices=WEIGHT_MODES,
        help="'none' uses a seeded frozen initialization, fully offline",
    )
    feats.add_argument(
        "--train-mode",
        action="store_true",
        help="enable the horizontal-flip augmentation used for training features",
    )
    feats.add_argument("--batch-size", type=int, default=16)
    feats.add_argument("--device", default="cpu")
    feats.add_argument("--seed", type=int, default=0)
    feats.add_argument(
        "--video-name", default=None, help="container video name (default: dir name)"
    )
    return parser


def _run(args) -> int:
    if args.command == "extract-frames":
        names = extract_frames(args.video, args.out)
        print(f"extracted {len(names)} frames to {args.out}", file=sys.stderr)
        return 0
    if args.command == "extract-features":
        config = ExtractorConfig(
            backbone=args.backbone,
            weights=args.weights,
            train_mode=args.train_mode,
            batch_size=args.batch_size,
            device=args.device,
            seed=args.seed,
        )
        count = extract_to_file(args.frames, args.out, config, args.video_name)
        print(f"wrote {count} feature rows to {args.out}", file=sys.stderr)
        return 0
    raise UsageError("no command given (try --help)")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        return _run(parser.parse_args(argv))
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    except UsageError as exc:
        print(f"{_PROG}: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"{_PROG}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
