"""Key-frame identification: fusion-distance features, a seeded classifier
ensemble with majority voting, and per-video precision/recall/F reporting.

The compiled fusion kernel is used when available; a numpy fallback with the
same summation order keeps results bit-identical either way (see
``kfid.kernels.BACKEND``).
"""

from kfid.classifier import (
    ClassifierHead,
    Prediction,
    TrainConfig,
    TrainResult,
    init_head,
    load_head,
    loss_and_gradient,
    predict,
    save_head,
    train,
)
from kfid.dataset import (
    DatasetManifest,
    Split,
    VideoEntry,
    average_memory_size,
    load_labels,
    load_manifest,
    load_reference_manifest,
    make_frame_id,
    parse_frame_id,
    save_labels,
    save_manifest,
    split_frames,
)
from kfid.distance import (
    AnchorSet,
    deep_distance,
    deep_distance_matrix,
    fuse,
    fuse_dataset,
    load_anchors,
    save_anchors,
    select_anchors,
)
from kfid.ensemble import VoteTally, majority_vote, run_ensemble, tally_votes
from kfid.errors import DataError, FormatError, KfidError, NumericError, UsageError
from kfid.features import (
    FeatureMatrix,
    SyntheticSpec,
    generate_synthetic,
    load_features,
    save_features,
)
from kfid.kernels import BACKEND, fused_matrix
from kfid.metrics import (
    ConfusionCounts,
    EvalReport,
    ModelScores,
    VideoScore,
    aggregate_report,
    confusion,
    load_reference_scores,
    parse_scores_csv,
    precision_recall_f,
    render_csv,
    render_text,
    scores_from_labels,
)
from kfid.rng import PortableRng

__version__ = "0.1.0"

__all__ = [
    "AnchorSet",
    "BACKEND",
    "ClassifierHead",
    "ConfusionCounts",
    "DataError",
    "DatasetManifest",
    "EvalReport",
    "FeatureMatrix",
    "FormatError",
    "KfidError",
    "ModelScores",
    "NumericError",
    "PortableRng",
    "Prediction",
    "Split",
    "SyntheticSpec",
    "TrainConfig",
    "TrainResult",
    "UsageError",
    "VideoEntry",
    "VideoScore",
    "VoteTally",
    "aggregate_report",
    "average_memory_size",
    "confusion",
    "deep_distance",
    "deep_distance_matrix",
    "fuse",
    "fuse_dataset",
    "fused_matrix",
    "generate_synthetic",
    "init_head",
    "load_anchors",
    "load_features",
    "load_head",
    "load_labels",
    "load_manifest",
    "load_reference_manifest",
    "load_reference_scores",
    "loss_and_gradient",
    "majority_vote",
    "make_frame_id",
    "parse_frame_id",
    "parse_scores_csv",
    "precision_recall_f",
    "predict",
    "render_csv",
    "render_text",
    "run_ensemble",
    "save_anchors",
    "save_features",
    "save_head",
    "save_labels",
    "save_manifest",
    "scores_from_labels",
    "select_anchors",
    "split_frames",
    "tally_votes",
    "train",
]
