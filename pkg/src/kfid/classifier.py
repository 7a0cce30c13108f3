"""Binary key/non-key classifier heads trained by gradient descent.

Two head kinds: a logistic-regression head ("linear") and a one-hidden-layer
variant with tanh units ("one_hidden"). Training minimizes mean binary
cross-entropy with decoupled weight decay (parameters are scaled by
1 - lr*decay each step, outside the loss gradient), using either plain SGD or
an adaptive-moment optimizer (moment decays 0.9/0.999, epsilon 1e-8).
Initialization and batch shuffling draw from the seeded portable RNG, so a
training run is a pure function of (features, labels, config).

Checkpoints use the KFH1 container: magic, version, kind tag, dims, then the
float64 parameters in a fixed order; round-trips are bit-exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from kfid.errors import DataError, FormatError, NumericError
from kfid.features import FeatureMatrix
from kfid.rng import PortableRng

HEAD_MAGIC = b"KFH1"
HEAD_VERSION = 1

KIND_LINEAR = "linear"
KIND_ONE_HIDDEN = "one_hidden"
_KIND_TAGS = {KIND_LINEAR: 0, KIND_ONE_HIDDEN: 1}
_TAG_KINDS = {tag: kind for kind, tag in _KIND_TAGS.items()}

OPTIMIZER_SGD = "sgd"
OPTIMIZER_ADAPTIVE = "adaptive"

_BETA1 = 0.9
_BETA2 = 0.999
_EPSILON = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.00003
    weight_decay: float = 0.01
    epochs: int = 100
    batch_size: int = 16
    seed: int = 0
    optimizer: str = OPTIMIZER_ADAPTIVE

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")
        if self.epochs <= 0:
            raise ValueError("epochs must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.optimizer not in (OPTIMIZER_SGD, OPTIMIZER_ADAPTIVE):
            raise ValueError(f"unknown optimizer: {self.optimizer!r}")


@dataclass(frozen=True)
class Prediction:
    frame_id: str
    score: float
    label: int


@dataclass(frozen=True)
class ClassifierHead:
    """Parameters of one head; weights and biases are listed per layer."""

    kind: str
    input_dim: int
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        weights = tuple(np.asarray(w, dtype=np.float64) for w in self.weights)
        biases = tuple(np.asarray(b, dtype=np.float64) for b in self.biases)
        if self.input_dim <= 0:
            raise DataError("input_dim must be positive")
        if self.kind == KIND_LINEAR:
            ok = (
                len(weights) == 1
                and len(biases) == 1
                and weights[0].shape == (self.input_dim,)
                and biases[0].shape == ()
            )
        elif self.kind == KIND_ONE_HIDDEN:
            ok = (
                len(weights) == 2
                and len(biases) == 2
                and weights[0].ndim == 2
                and weights[0].shape[1] == self.input_dim
                and weights[0].shape[0] >= 1
                and biases[0].shape == (weights[0].shape[0],)
                and weights[1].shape == (weights[0].shape[0],)
                and biases[1].shape == ()
            )
        else:
            raise DataError(f"unknown head kind: {self.kind!r}")
        if not ok:
            raise DataError(f"parameter shapes inconsistent with kind {self.kind!r}")
        for arr in weights + biases:
            if not np.all(np.isfinite(arr)):
                raise DataError("head parameters contain non-finite values")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def hidden_units(self) -> int:
        return self.weights[0].shape[0] if self.kind == KIND_ONE_HIDDEN else 0

    def logits(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise DataError(
                f"dimension mismatch: head expects {self.input_dim}-d inputs, "
                f"got {x.shape}"
            )
        if self.kind == KIND_LINEAR:
            return x @ self.weights[0] + self.biases[0]
        hidden = np.tanh(x @ self.weights[0].T + self.biases[0])
        return hidden @ self.weights[1] + self.biases[1]

    def to_vector(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(np.atleast_1d(b))
        return np.concatenate(parts)

    def with_vector(self, vec: np.ndarray) -> "ClassifierHead":
        vec = np.asarray(vec, dtype=np.float64)
        expected = sum(w.size for w in self.weights) + sum(
            b.size for b in self.biases
        )
        if vec.ndim != 1 or vec.size != expected:
            raise DataError("parameter vector has wrong length")
        weights = []
        biases = []
        pos = 0
        for w, b in zip(self.weights, self.biases):
            weights.append(vec[pos : pos + w.size].reshape(w.shape))
            pos += w.size
            biases.append(vec[pos : pos + b.size].reshape(b.shape))
            pos += b.size
        return ClassifierHead(self.kind, self.input_dim, tuple(weights), tuple(biases))


@dataclass
class TrainResult:
    head: ClassifierHead
    epoch_losses: list[float] = field(default_factory=list)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    expz = np.exp(z[~pos])
    out[~pos] = expz / (1.0 + expz)
    return out


def _bce(logits: np.ndarray, y: np.ndarray) -> float:
    # softplus(z) - y*z, with softplus computed in the overflow-safe form
    softplus = np.maximum(logits, 0.0) + np.log1p(np.exp(-np.abs(logits)))
    return float(np.mean(softplus - y * logits))


def _flatten_grads(
    grad_w: tuple[np.ndarray, ...], grad_b: tuple[np.ndarray, ...]
) -> np.ndarray:
    # same parameter order as ClassifierHead.to_vector
    parts = []
    for w, b in zip(grad_w, grad_b):
        parts.append(np.asarray(w, dtype=np.float64).ravel())
        parts.append(np.atleast_1d(np.asarray(b, dtype=np.float64)))
    return np.concatenate(parts)


def init_head(
    kind: str, input_dim: int, rng: PortableRng, hidden_units: int = 16
) -> ClassifierHead:
    """Weights uniform in +/- 1/sqrt(fan_in), biases zero."""

    def uniform_matrix(rows, cols, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        vals = np.empty((rows, cols), dtype=np.float64)
        for r in range(rows):
            for c in range(cols):
                vals[r, c] = (2.0 * rng.next_float() - 1.0) * bound
        return vals

    if kind == KIND_LINEAR:
        w = uniform_matrix(1, input_dim, input_dim)[0]
        return ClassifierHead(kind, input_dim, (w,), (np.float64(0.0),))
    if kind == KIND_ONE_HIDDEN:
        w1 = uniform_matrix(hidden_units, input_dim, input_dim)
        w2 = uniform_matrix(1, hidden_units, hidden_units)[0]
        return ClassifierHead(
            kind,
            input_dim,
            (w1, w2),
            (np.zeros(hidden_units), np.float64(0.0)),
        )
    raise DataError(f"unknown head kind: {kind!r}")


def loss_and_gradient(
    head: ClassifierHead, x: np.ndarray, y: np.ndarray
) -> tuple[float, tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]]:
    """Mean BCE and its exact gradient, shaped like (weights, biases)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[0] == 0:
        raise DataError("empty batch")
    n = x.shape[0]
    if head.kind == KIND_LINEAR:
        logits = x @ head.weights[0] + head.biases[0]
        loss = _bce(logits, y)
        dz = (_sigmoid(logits) - y) / n
        grad_w = x.T @ dz
        grad_b = np.float64(np.sum(dz))
        return loss, ((grad_w,), (grad_b,))
    pre = x @ head.weights[0].T + head.biases[0]
    hidden = np.tanh(pre)
    logits = hidden @ head.weights[1] + head.biases[1]
    loss = _bce(logits, y)
    dz = (_sigmoid(logits) - y) / n
    grad_w2 = hidden.T @ dz
    grad_b2 = np.float64(np.sum(dz))
    dhidden = np.outer(dz, head.weights[1]) * (1.0 - hidden * hidden)
    grad_w1 = dhidden.T @ x
    grad_b1 = dhidden.sum(axis=0)
    return loss, ((grad_w1, grad_w2), (grad_b1, grad_b2))


def train(
    features: FeatureMatrix,
    labels: list[int],
    config: TrainConfig,
    kind: str = KIND_LINEAR,
    hidden_units: int = 16,
) -> TrainResult:
    """Gradient-descent training; returns the head plus the per-epoch loss trace.

    The trace holds the mean pre-update batch loss of each epoch. Batches are
    reshuffled every epoch when batch_size < N; full-batch runs keep the
    natural row order.
    """
    x = features.data
    y = np.asarray(labels, dtype=np.float64)
    if len(labels) != features.n_frames:
        raise DataError("labels are not aligned with feature rows")
    if features.n_frames < 2:
        raise DataError("training needs at least two frames")
    if len({int(v) for v in labels}) < 2:
        raise DataError("single-class input: training needs both labels")

    rng = PortableRng(config.seed)
    head = init_head(kind, features.dim, rng, hidden_units)
    params = head.to_vector()
    n = features.n_frames
    full_batch = config.batch_size >= n
    order = list(range(n))

    momentum = np.zeros_like(params)
    second_moment = np.zeros_like(params)
    step = 0
    decay_scale = 1.0 - config.learning_rate * config.weight_decay

    epoch_losses: list[float] = []
    for epoch in range(config.epochs):
        if not full_batch:
            rng.shuffle(order)
        batch_losses = []
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            current = head.with_vector(params)
            loss, (grad_w, grad_b) = loss_and_gradient(current, x[batch], y[batch])
            if not np.isfinite(loss):
                raise NumericError(f"non-finite training loss at epoch {epoch}")
            batch_losses.append(loss)
            grad_vec = _flatten_grads(grad_w, grad_b)
            step += 1
            params = params * decay_scale
            if config.optimizer == OPTIMIZER_SGD:
                params = params - config.learning_rate * grad_vec
            else:
                momentum = _BETA1 * momentum + (1.0 - _BETA1) * grad_vec
                second_moment = _BETA2 * second_moment + (1.0 - _BETA2) * (
                    grad_vec * grad_vec
                )
                m_hat = momentum / (1.0 - _BETA1**step)
                v_hat = second_moment / (1.0 - _BETA2**step)
                params = params - config.learning_rate * m_hat / (
                    np.sqrt(v_hat) + _EPSILON
                )
            if not np.all(np.isfinite(params)):
                raise NumericError(f"non-finite parameters at epoch {epoch}")
        epoch_losses.append(float(np.mean(batch_losses)))
    final = head.with_vector(params)
    return TrainResult(final, epoch_losses)


def predict(
    head: ClassifierHead, features: FeatureMatrix, threshold: float = 0.5
) -> list[Prediction]:
    """Sigmoid scores with the >= threshold rule (ties classify as key)."""
    logits = head.logits(features.data)
    scores = _sigmoid(logits)
    return [
        Prediction(frame_id, float(score), 1 if score >= threshold else 0)
        for frame_id, score in zip(features.frame_ids, scores)
    ]


def save_head(head: ClassifierHead, path: str | Path) -> None:
    header = HEAD_MAGIC + struct.pack(
        "<IIQQ",
        HEAD_VERSION,
        _KIND_TAGS[head.kind],
        head.input_dim,
        head.hidden_units,
    )
    payload = np.ascontiguousarray(head.to_vector(), dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def load_head(path: str | Path, expected_kind: str | None = None) -> ClassifierHead:
    blob = Path(path).read_bytes()
    if len(blob) < 4 or blob[:4] != HEAD_MAGIC:
        raise FormatError(f"{path}: bad magic, not a KFH1 file")
    if len(blob) < 4 + struct.calcsize("<IIQQ"):
        raise FormatError(f"{path}: truncated header")
    version, kind_tag, input_dim, hidden = struct.unpack_from("<IIQQ", blob, 4)
    if version != HEAD_VERSION:
        raise FormatError(f"{path}: unsupported KFH1 version {version}")
    if kind_tag not in _TAG_KINDS:
        raise FormatError(f"{path}: unknown kind tag {kind_tag}")
    kind = _TAG_KINDS[kind_tag]
    if expected_kind is not None and kind != expected_kind:
        raise FormatError(
            f"{path}: kind mismatch, expected {expected_kind!r} got {kind!r}"
        )
    if kind == KIND_LINEAR:
        count = input_dim + 1
    else:
        if hidden == 0:
            raise FormatError(f"{path}: one-hidden head with zero hidden units")
        count = hidden * input_dim + hidden + hidden + 1
    offset = 4 + struct.calcsize("<IIQQ")
    if len(blob) - offset < count * 8:
        raise FormatError(f"{path}: truncated payload")
    if len(blob) - offset > count * 8:
        raise FormatError(f"{path}: trailing data after payload")
    vec = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).astype(
        np.float64
    )
    if kind == KIND_LINEAR:
        return ClassifierHead(
            kind, int(input_dim), (vec[:input_dim],), (vec[input_dim],)
        )
    h = int(hidden)
    d = int(input_dim)
    w1 = vec[: h * d].reshape(h, d)
    b1 = vec[h * d : h * d + h]
    w2 = vec[h * d + h : h * d + 2 * h]
    b2 = vec[h * d + 2 * h]
    return ClassifierHead(kind, d, (w1, w2), (b1, b2))
