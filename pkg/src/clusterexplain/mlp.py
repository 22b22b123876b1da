"""Feed-forward ReLU classifier trained with Adam on cluster labels.

The network sees the intercept column as an ordinary constant input (in
addition to the per-layer biases); masked SFIT inputs keep only that column
and the tested features.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .data import Dataset, ScalingParams
from .errors import BadLabel, DimensionMismatch, LabelMissing, MissingFile

PROB_FLOOR = 1e-12
FORMAT_VERSION = 1


@dataclass(frozen=True)
class MlpConfig:
    hidden_sizes: tuple = (50, 25, 10)
    max_epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3
    early_stopping_patience: int = 5
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ValueError("hidden_sizes must be a nonempty list of positive widths")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.early_stopping_patience < 1:
            raise ValueError("early_stopping_patience must be >= 1")


@dataclass
class MlpModel:
    weights: list
    biases: list
    config: MlpConfig = field(default_factory=MlpConfig)
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = 0
    scaling: Optional[ScalingParams] = None
    feature_names: Optional[tuple] = None

    @property
    def input_width(self) -> int:
        return self.weights[0].shape[0]

    @property
    def n_classes(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def layer_sizes(self) -> list:
        return [self.input_width] + [W.shape[1] for W in self.weights]

    def logits(self, X) -> np.ndarray:
        return _forward(self.weights, self.biases, _as_batch(X, self.input_width))[-1]

    def predict_proba(self, X) -> np.ndarray:
        return predict_proba(self, X)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for a in (*self.weights, *self.biases):
            h.update(np.ascontiguousarray(a, dtype="<f8").tobytes())
        return h.hexdigest()[:16]


def _as_batch(X, width):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[-1] != width:
        raise DimensionMismatch(f"input width {X.shape[-1]}, model expects {width}")
    return X


def _forward(weights, biases, X):
    acts = [X]
    a = X
    for W, b in zip(weights[:-1], biases[:-1]):
        a = np.maximum(a @ W + b, 0.0)
        acts.append(a)
    acts.append(a @ weights[-1] + biases[-1])
    return acts


def _log_softmax(z):
    top = z.argmax(axis=1)
    z = z - z[np.arange(len(z)), top][:, None]
    e = np.exp(z)
    # log1p of the non-maximal mass keeps tiny losses of confident rows
    # instead of rounding log(1 + tiny) to 0.
    e[np.arange(len(z)), top] = 0.0
    return z - np.log1p(e.sum(axis=1, keepdims=True))


def _mean_xent(weights, biases, X, y0):
    logp = _log_softmax(_forward(weights, biases, X)[-1])
    return -logp[np.arange(len(y0)), y0].mean()


def _gradients(weights, biases, X, y0):
    """Mean cross-entropy and its gradients; ``y0`` holds 0-based classes."""
    acts = _forward(weights, biases, X)
    logp = _log_softmax(acts[-1])
    m = len(y0)
    value = -logp[np.arange(m), y0].mean()
    delta = np.exp(logp)
    delta[np.arange(m), y0] -= 1.0
    delta /= m
    gW, gb = [None] * len(weights), [None] * len(weights)
    for layer in range(len(weights) - 1, -1, -1):
        gW[layer] = acts[layer].T @ delta
        gb[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ weights[layer].T) * (acts[layer] > 0)
    return value, gW, gb


def init_params(layer_sizes, rng):
    """He-uniform weights (bound sqrt(6 / fan_in)), zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def loss_and_gradients(m: MlpModel, X, y):
    """Mean cross-entropy over the batch and its parameter gradients.

    Returns ``(value, weight_grads, bias_grads)``; labels are 1-based.
    """
    X = _as_batch(X, m.input_width)
    y0 = np.atleast_1d(np.asarray(y, dtype=np.int64)) - 1
    return _gradients(m.weights, m.biases, X, y0)


def _check_labels(d: Dataset, what):
    if d.labels is None:
        raise LabelMissing(f"{what} set has no labels")


def train(train: Dataset, validation: Optional[Dataset], cfg: MlpConfig = MlpConfig()) -> MlpModel:
    """Minimise cross-entropy with minibatch Adam and early stopping.

    The weights from the epoch with the lowest validation loss are returned.
    Without a validation set the training loss is monitored instead.
    """
    _check_labels(train, "training")
    if validation is not None:
        _check_labels(validation, "validation")
        if validation.X.shape[1] != train.X.shape[1]:
            raise DimensionMismatch("training and validation widths differ")
    n_classes = int(train.labels.max())
    if validation is not None and validation.n:
        n_classes = max(n_classes, int(validation.labels.max()))

    rng = np.random.default_rng(cfg.seed)
    sizes = [train.X.shape[1], *cfg.hidden_sizes, n_classes]
    weights, biases = init_params(sizes, rng)
    params = weights + biases
    mom = [np.zeros_like(a) for a in params]
    vel = [np.zeros_like(a) for a in params]
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2

    X, y0 = train.X, train.labels - 1
    monitor = (validation.X, validation.labels - 1) if validation is not None and validation.n else (X, y0)
    train_log, val_log = [], []
    best = (np.inf, -1, None)
    step = 0
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(train.n)
        for start in range(0, train.n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, gW, gb = _gradients(weights, biases, X[idx], y0[idx])
            step += 1
            c1, c2 = 1 - b1 ** step, 1 - b2 ** step
            for a, g, mo, ve in zip(params, gW + gb, mom, vel):
                mo *= b1
                mo += (1 - b1) * g
                ve *= b2
                ve += (1 - b2) * g * g
                a -= cfg.learning_rate * (mo / c1) / (np.sqrt(ve / c2) + cfg.adam_eps)
        train_log.append(float(_mean_xent(weights, biases, X, y0)))
        val_log.append(float(_mean_xent(weights, biases, *monitor)))
        if val_log[-1] < best[0]:
            best = (val_log[-1], epoch, [a.copy() for a in params])
        elif epoch - best[1] >= cfg.early_stopping_patience:
            break

    k = len(weights)
    saved = best[2]
    return MlpModel(
        weights=saved[:k],
        biases=saved[k:],
        config=cfg,
        train_loss=train_log,
        val_loss=val_log,
        best_epoch=best[1],
        feature_names=train.feature_names,
    )


def predict_proba(m: MlpModel, X) -> np.ndarray:
    """Softmax class probabilities; a single vector gives a 1 x C result."""
    return np.exp(_log_softmax(m.logits(X)))


def losses(m: MlpModel, X, y) -> np.ndarray:
    """Per-row cross-entropy with the true-class probability floored at 1e-12."""
    y = np.atleast_1d(np.asarray(y, dtype=np.int64))
    if y.size and (y.min() < 1 or y.max() > m.n_classes):
        raise BadLabel(f"labels must be in 1..{m.n_classes}")
    logp = _log_softmax(m.logits(X))
    if len(logp) != len(y):
        raise DimensionMismatch(f"{len(logp)} inputs for {len(y)} labels")
    # Taken from log-probabilities so near-certain predictions keep a
    # nonzero loss instead of rounding to exactly 0.
    return np.minimum(-logp[np.arange(len(y)), y - 1], -np.log(PROB_FLOOR))


def loss(m: MlpModel, x, y: int) -> float:
    return float(losses(m, x, [y])[0])


def predict(m: MlpModel, X) -> np.ndarray:
    """Most probable 1-based class; ties go to the lowest index."""
    return np.argmax(predict_proba(m, X), axis=1) + 1


def accuracy(m: MlpModel, d: Dataset) -> float:
    _check_labels(d, "evaluation")
    if d.n == 0:
        return float("nan")
    return float(np.mean(predict(m, d.X) == d.labels))


def model_to_dict(m: MlpModel) -> dict:
    return {
        "format": "clusterexplain.mlp",
        "version": FORMAT_VERSION,
        "layer_sizes": m.layer_sizes,
        "weights": [W.tolist() for W in m.weights],
        "biases": [b.tolist() for b in m.biases],
        "config": asdict(m.config),
        "training_log": {"train_loss": m.train_loss, "val_loss": m.val_loss, "best_epoch": m.best_epoch},
        "scaling": None if m.scaling is None else {
            "means": m.scaling.means.tolist(), "scales": m.scaling.scales.tolist()},
        "feature_names": None if m.feature_names is None else list(m.feature_names),
    }


def model_from_dict(obj: dict) -> MlpModel:
    if obj.get("format") != "clusterexplain.mlp" or obj.get("version") != FORMAT_VERSION:
        raise ValueError("not a clusterexplain model blob (or unsupported version)")
    weights = [np.array(W, dtype=np.float64) for W in obj["weights"]]
    biases = [np.array(b, dtype=np.float64) for b in obj["biases"]]
    if [weights[0].shape[0]] + [W.shape[1] for W in weights] != obj["layer_sizes"]:
        raise DimensionMismatch("layer_sizes disagree with stored weights")
    log = obj["training_log"]
    sc = obj.get("scaling")
    names = obj.get("feature_names")
    return MlpModel(
        weights=weights,
        biases=biases,
        config=MlpConfig(**obj["config"]),
        train_loss=list(log["train_loss"]),
        val_loss=list(log["val_loss"]),
        best_epoch=int(log["best_epoch"]),
        scaling=None if sc is None else ScalingParams(sc["means"], sc["scales"]),
        feature_names=None if names is None else tuple(names),
    )


def save_model(m: MlpModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(m), indent=1) + "\n", encoding="utf-8")


def load_model(path) -> MlpModel:
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"model file {path} not found")
    return model_from_dict(json.loads(path.read_text(encoding="utf-8")))
