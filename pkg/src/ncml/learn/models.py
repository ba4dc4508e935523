"""Four from-scratch binary classifier families over feedback features.

Gaussian naive Bayes, an information-gain decision tree, logistic regression
trained by gradient ascent, and a one-hidden-layer sigmoid MLP.  All of them
share the same canonical six-feature input; categorical features (terrain,
modulation) stay integer-coded for the tree and naive Bayes and are one-hot
expanded (with z-scoring of the numeric columns) for the gradient-trained
families.

Training is deterministic given the data order and a seed.  Prediction ties
resolve to NAK: an unnecessary retransmission is recoverable, a skipped one
is not.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from ..feedback import FeedbackFeatures, TrueState
from .dataset import ACK_LABEL, CATEGORICAL_FEATURES, NAK_LABEL, Dataset

__all__ = [
    "ModelFamily",
    "FAMILY_ORDER",
    "TrainConfig",
    "DEFAULT_TRAIN_CONFIG",
    "ClassifierModel",
    "train",
    "predict",
    "evaluate",
    "save_model",
    "load_model",
    "MlpWeights",
    "mlp_loss",
    "mlp_loss_and_gradients",
    "fit_mlp",
]


class ModelFamily(Enum):
    GAUSSIAN_NB = "GaussianNaiveBayes"
    DECISION_TREE = "DecisionTree"
    LOGISTIC_REGRESSION = "LogisticRegression"
    MLP = "MLP"


# Fixed enumeration order; model selection breaks ties toward earlier entries.
FAMILY_ORDER = (
    ModelFamily.GAUSSIAN_NB,
    ModelFamily.DECISION_TREE,
    ModelFamily.LOGISTIC_REGRESSION,
    ModelFamily.MLP,
)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for all families; defaults are deliberately modest."""

    nb_variance_floor: float = 1e-6
    tree_max_depth: int = 8
    tree_min_leaf: int = 5
    logreg_learning_rate: float = 0.5
    logreg_max_iter: int = 500
    logreg_tolerance: float = 1e-7
    mlp_hidden_units: int = 16
    mlp_epochs: int = 200
    mlp_learning_rate: float = 0.05
    mlp_batch_size: int | None = 64


DEFAULT_TRAIN_CONFIG = TrainConfig()


# ---------------------------------------------------------------------------
# Feature encoding for the gradient-trained families


@dataclass(frozen=True)
class FeatureEncoder:
    """Per-feature transform: z-score numeric columns, one-hot categoricals.

    ``spec`` holds one entry per selected feature, in selection order:
    ("num", mean, std) or ("cat", categories).
    """

    selected: tuple[int, ...]
    spec: tuple[tuple, ...]

    @classmethod
    def fit(cls, X: np.ndarray, selected: Sequence[int]) -> "FeatureEncoder":
        spec = []
        for j in selected:
            if j in CATEGORICAL_FEATURES:
                spec.append(("cat", CATEGORICAL_FEATURES[j]))
            else:
                col = X[:, j]
                mean = float(np.mean(col))
                std = float(np.std(col))
                spec.append(("num", mean, max(std, 1e-9)))
        return cls(tuple(selected), tuple(spec))

    @property
    def width(self) -> int:
        return sum(len(s[1]) if s[0] == "cat" else 1 for s in self.spec)

    def transform(self, X: np.ndarray) -> np.ndarray:
        cols = []
        for j, s in zip(self.selected, self.spec):
            col = X[:, j]
            if s[0] == "cat":
                for cat in s[1]:
                    cols.append((col == cat).astype(float))
            else:
                cols.append((col - s[1]) / s[2])
        return np.column_stack(cols)

    def transform_row(self, vec: Sequence[float]) -> list[float]:
        out: list[float] = []
        for j, s in zip(self.selected, self.spec):
            v = vec[j]
            if s[0] == "cat":
                out.extend(1.0 if v == cat else 0.0 for cat in s[1])
            else:
                out.append((v - s[1]) / s[2])
        return out

    def to_dict(self) -> dict:
        return {"selected": list(self.selected), "spec": [list(s) for s in self.spec]}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureEncoder":
        spec = tuple(
            ("cat", tuple(s[1])) if s[0] == "cat" else ("num", s[1], s[2])
            for s in d["spec"]
        )
        return cls(tuple(d["selected"]), spec)


# ---------------------------------------------------------------------------
# Gaussian naive Bayes


@dataclass(frozen=True)
class GnbParams:
    """Per-class priors and per-feature Gaussian moments over the selected
    (integer-coded) columns; class index 0 is NAK, 1 is ACK."""

    selected: tuple[int, ...]
    log_priors: tuple[float, float]
    means: tuple[tuple[float, ...], tuple[float, ...]]
    variances: tuple[tuple[float, ...], tuple[float, ...]]

    def to_dict(self) -> dict:
        return {
            "selected": list(self.selected),
            "log_priors": list(self.log_priors),
            "means": [list(m) for m in self.means],
            "variances": [list(v) for v in self.variances],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GnbParams":
        return cls(
            tuple(d["selected"]),
            tuple(d["log_priors"]),
            tuple(tuple(m) for m in d["means"]),
            tuple(tuple(v) for v in d["variances"]),
        )


def _fit_gnb(X: np.ndarray, y: np.ndarray, selected: Sequence[int], config: TrainConfig) -> GnbParams:
    n = len(y)
    log_priors = []
    means = []
    variances = []
    for label in (NAK_LABEL, ACK_LABEL):
        rows = X[y == label][:, list(selected)]
        if rows.shape[0] == 0:
            log_priors.append(-math.inf)
            means.append(tuple(0.0 for _ in selected))
            variances.append(tuple(1.0 for _ in selected))
            continue
        log_priors.append(math.log(rows.shape[0] / n))
        means.append(tuple(float(v) for v in rows.mean(axis=0)))
        var = np.maximum(rows.var(axis=0), config.nb_variance_floor)
        variances.append(tuple(float(v) for v in var))
    return GnbParams(tuple(selected), tuple(log_priors), tuple(means), tuple(variances))


def _gnb_predict_row(p: GnbParams, vec: Sequence[float]) -> int:
    scores = []
    for c in range(2):
        s = p.log_priors[c]
        if s == -math.inf:
            scores.append(s)
            continue
        for k, j in enumerate(p.selected):
            mu = p.means[c][k]
            var = p.variances[c][k]
            d = vec[j] - mu
            s -= 0.5 * (math.log(2.0 * math.pi * var) + d * d / var)
        scores.append(s)
    return ACK_LABEL if scores[ACK_LABEL] > scores[NAK_LABEL] else NAK_LABEL


def _gnb_predict_many(p: GnbParams, X: np.ndarray) -> np.ndarray:
    sub = X[:, list(p.selected)]
    scores = np.empty((X.shape[0], 2))
    for c in range(2):
        if p.log_priors[c] == -math.inf:
            scores[:, c] = -np.inf
            continue
        mu = np.array(p.means[c])
        var = np.array(p.variances[c])
        ll = -0.5 * (np.log(2.0 * np.pi * var) + (sub - mu) ** 2 / var)
        scores[:, c] = p.log_priors[c] + ll.sum(axis=1)
    return np.where(scores[:, ACK_LABEL] > scores[:, NAK_LABEL], ACK_LABEL, NAK_LABEL)


# ---------------------------------------------------------------------------
# Decision tree


@dataclass(frozen=True)
class TreeParams:
    selected: tuple[int, ...]
    root: dict

    def to_dict(self) -> dict:
        return {"selected": list(self.selected), "root": self.root}

    @classmethod
    def from_dict(cls, d: dict) -> "TreeParams":
        return cls(tuple(d["selected"]), d["root"])


def _binary_entropy(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p))
    return np.where((p <= 0.0) | (p >= 1.0), 0.0, h)


def _majority(y: np.ndarray) -> int:
    pos = int(y.sum())
    return ACK_LABEL if pos > len(y) - pos else NAK_LABEL


def _build_tree(X: np.ndarray, y: np.ndarray, depth: int, config: TrainConfig) -> dict:
    n = len(y)
    pos = int(y.sum())
    if pos == 0 or pos == n or depth >= config.tree_max_depth or n < 2 * config.tree_min_leaf:
        return {"leaf": _majority(y)}

    parent_h = float(_binary_entropy(np.array([pos / n]))[0])
    best_gain = 0.0
    best: tuple[int, float] | None = None
    for j in range(X.shape[1]):
        col = X[:, j]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        sy = y[order]
        change = np.flatnonzero(sv[1:] > sv[:-1])
        if change.size == 0:
            continue
        left_n = change + 1
        right_n = n - left_n
        feasible = (left_n >= config.tree_min_leaf) & (right_n >= config.tree_min_leaf)
        if not feasible.any():
            continue
        left_pos = np.cumsum(sy)[change]
        right_pos = pos - left_pos
        h_left = _binary_entropy(left_pos / left_n)
        h_right = _binary_entropy(right_pos / right_n)
        gains = parent_h - (left_n * h_left + right_n * h_right) / n
        gains = np.where(feasible, gains, -np.inf)
        b = int(np.argmax(gains))
        if gains[b] > best_gain + 1e-15:
            best_gain = float(gains[b])
            best = (j, float(0.5 * (sv[b] + sv[b + 1])))

    if best is None:
        return {"leaf": _majority(y)}
    j, threshold = best
    mask = X[:, j] < threshold
    return {
        "feature": j,
        "threshold": threshold,
        "left": _build_tree(X[mask], y[mask], depth + 1, config),
        "right": _build_tree(X[~mask], y[~mask], depth + 1, config),
    }


def _fit_tree(X: np.ndarray, y: np.ndarray, selected: Sequence[int], config: TrainConfig) -> TreeParams:
    sub = X[:, list(selected)]
    return TreeParams(tuple(selected), _build_tree(sub, y, 0, config))


def _tree_predict_row(p: TreeParams, vec: Sequence[float]) -> int:
    node = p.root
    while "leaf" not in node:
        v = vec[p.selected[node["feature"]]]
        node = node["left"] if v < node["threshold"] else node["right"]
    return node["leaf"]


def _tree_predict_many(p: TreeParams, X: np.ndarray) -> np.ndarray:
    return np.array([_tree_predict_row(p, row) for row in X], dtype=int)


# ---------------------------------------------------------------------------
# Logistic regression


@dataclass(frozen=True)
class LogRegParams:
    encoder: FeatureEncoder
    weights: tuple[float, ...]
    bias: float

    def to_dict(self) -> dict:
        return {
            "encoder": self.encoder.to_dict(),
            "weights": list(self.weights),
            "bias": self.bias,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LogRegParams":
        return cls(FeatureEncoder.from_dict(d["encoder"]), tuple(d["weights"]), d["bias"])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Clipping at |z| = 40 keeps exp() in range and is exact to double
    # precision (sigmoid saturates to within 1 ulp well before 40).
    return 1.0 / (1.0 + np.exp(-np.clip(z, -40.0, 40.0)))


def _fit_logreg(X: np.ndarray, y: np.ndarray, selected: Sequence[int], config: TrainConfig) -> LogRegParams:
    encoder = FeatureEncoder.fit(X, selected)
    Xe = encoder.transform(X)
    n, d = Xe.shape
    w = np.zeros(d)
    b = 0.0
    yf = y.astype(float)
    prev_ll = -np.inf
    for _ in range(config.logreg_max_iter):
        z = Xe @ w + b
        # mean log-likelihood: y*z - log(1 + exp(z)), computed stably
        ll = float(np.mean(yf * z - np.logaddexp(0.0, z)))
        if abs(ll - prev_ll) < config.logreg_tolerance:
            break
        prev_ll = ll
        residual = yf - _sigmoid(z)
        w += config.logreg_learning_rate * (Xe.T @ residual) / n
        b += config.logreg_learning_rate * float(residual.mean())
    return LogRegParams(encoder, tuple(float(v) for v in w), float(b))


def _logreg_predict_row(p: LogRegParams, vec: Sequence[float]) -> int:
    x = p.encoder.transform_row(vec)
    z = p.bias + sum(wi * xi for wi, xi in zip(p.weights, x))
    return ACK_LABEL if z > 0.0 else NAK_LABEL


def _logreg_predict_many(p: LogRegParams, X: np.ndarray) -> np.ndarray:
    z = p.encoder.transform(X) @ np.array(p.weights) + p.bias
    return np.where(z > 0.0, ACK_LABEL, NAK_LABEL)


# ---------------------------------------------------------------------------
# One-hidden-layer MLP


@dataclass
class MlpWeights:
    w1: np.ndarray  # (d, h)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (h,)
    b2: float

    def copy(self) -> "MlpWeights":
        return MlpWeights(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2)


@dataclass(frozen=True)
class MlpParams:
    encoder: FeatureEncoder
    weights: MlpWeights

    def to_dict(self) -> dict:
        w = self.weights
        return {
            "encoder": self.encoder.to_dict(),
            "w1": [[float(v) for v in row] for row in w.w1],
            "b1": [float(v) for v in w.b1],
            "w2": [float(v) for v in w.w2],
            "b2": float(w.b2),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpParams":
        weights = MlpWeights(
            np.array(d["w1"], dtype=float).reshape(len(d["w1"]), len(d["b1"])),
            np.array(d["b1"], dtype=float),
            np.array(d["w2"], dtype=float),
            float(d["b2"]),
        )
        return cls(FeatureEncoder.from_dict(d["encoder"]), weights)


def _mlp_gradients(weights: MlpWeights, X: np.ndarray, yf: np.ndarray) -> MlpWeights:
    n = X.shape[0]
    h = _sigmoid(X @ weights.w1 + weights.b1)
    z = h @ weights.w2 + weights.b2
    dz = (_sigmoid(z) - yf) / n
    gw2 = h.T @ dz
    gb2 = float(dz.sum())
    dpre1 = np.outer(dz, weights.w2) * (h - h * h)
    gw1 = X.T @ dpre1
    gb1 = dpre1.sum(axis=0)
    return MlpWeights(gw1, gb1, gw2, gb2)


def mlp_loss(weights: MlpWeights, X: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy of the sigmoid network, computed from logits."""
    h = _sigmoid(X @ weights.w1 + weights.b1)
    z = h @ weights.w2 + weights.b2
    return float(np.mean(np.logaddexp(0.0, z) - y.astype(float) * z))


def mlp_loss_and_gradients(
    weights: MlpWeights, X: np.ndarray, y: np.ndarray
) -> tuple[float, MlpWeights]:
    """Mean cross-entropy and its analytic gradients.

    Pure in the weights; the gradient-check tests difference this function.
    """
    return mlp_loss(weights, X, y), _mlp_gradients(weights, X, y.astype(float))


def _init_mlp(d: int, hidden: int, rng) -> MlpWeights:
    w1 = rng.standard_normal((d, hidden)) / math.sqrt(d)
    w2 = rng.standard_normal(hidden) / math.sqrt(hidden)
    return MlpWeights(w1, np.zeros(hidden), w2, 0.0)


def fit_mlp(
    X: np.ndarray,
    y: np.ndarray,
    config: TrainConfig,
    seed: int,
    *,
    track_loss: bool = False,
) -> tuple[MlpWeights, list[float]]:
    """Mini-batch gradient descent for a fixed epoch budget.

    With ``track_loss`` the full-batch loss after each epoch is returned; a
    batch size of None trains full-batch, in which case that trace is
    non-increasing for step sizes below the fixture stability threshold.
    """
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    yf = y.astype(float)
    weights = _init_mlp(X.shape[1], config.mlp_hidden_units, rng)
    batch = config.mlp_batch_size
    history: list[float] = []
    for _ in range(config.mlp_epochs):
        if batch is None or batch >= n:
            _apply_step(weights, _mlp_gradients(weights, X, yf), config.mlp_learning_rate)
        else:
            perm = rng.permutation(n)
            for start in range(0, n, batch):
                idx = perm[start : start + batch]
                grads = _mlp_gradients(weights, X[idx], yf[idx])
                _apply_step(weights, grads, config.mlp_learning_rate)
        if track_loss:
            history.append(mlp_loss(weights, X, y))
    return weights, history


def _apply_step(weights: MlpWeights, grads: MlpWeights, lr: float) -> None:
    weights.w1 -= lr * grads.w1
    weights.b1 -= lr * grads.b1
    weights.w2 -= lr * grads.w2
    weights.b2 -= lr * grads.b2


def _fit_mlp_params(X: np.ndarray, y: np.ndarray, selected: Sequence[int], config: TrainConfig, seed: int) -> MlpParams:
    encoder = FeatureEncoder.fit(X, selected)
    weights, _ = fit_mlp(encoder.transform(X), y, config, seed)
    return MlpParams(encoder, weights)


def _mlp_predict_row(p: MlpParams, vec: Sequence[float]) -> int:
    x = np.array(p.encoder.transform_row(vec))
    h = _sigmoid(x @ p.weights.w1 + p.weights.b1)
    z = float(h @ p.weights.w2 + p.weights.b2)
    return ACK_LABEL if z > 0.0 else NAK_LABEL


def _mlp_predict_many(p: MlpParams, X: np.ndarray) -> np.ndarray:
    h = _sigmoid(p.encoder.transform(X) @ p.weights.w1 + p.weights.b1)
    z = h @ p.weights.w2 + p.weights.b2
    return np.where(z > 0.0, ACK_LABEL, NAK_LABEL)


# ---------------------------------------------------------------------------
# The public model object and operations


@dataclass
class ClassifierModel:
    """A trained classifier plus its selected feature subset.

    Prediction is a deterministic function of (params, selected_features,
    input); ``validation_accuracy`` is filled in by the selection loop.
    """

    family: ModelFamily
    selected_features: tuple[int, ...]
    params: object
    validation_accuracy: float = 0.0

    def predict_label(self, vec: Sequence[float]) -> int:
        return _ROW_PREDICT[self.family](self.params, vec)

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        return _MANY_PREDICT[self.family](self.params, X)

    def with_validation_accuracy(self, acc: float) -> "ClassifierModel":
        return replace(self, validation_accuracy=acc)


_ROW_PREDICT = {
    ModelFamily.GAUSSIAN_NB: _gnb_predict_row,
    ModelFamily.DECISION_TREE: _tree_predict_row,
    ModelFamily.LOGISTIC_REGRESSION: _logreg_predict_row,
    ModelFamily.MLP: _mlp_predict_row,
}

_MANY_PREDICT = {
    ModelFamily.GAUSSIAN_NB: _gnb_predict_many,
    ModelFamily.DECISION_TREE: _tree_predict_many,
    ModelFamily.LOGISTIC_REGRESSION: _logreg_predict_many,
    ModelFamily.MLP: _mlp_predict_many,
}

_PARAMS_CODEC = {
    ModelFamily.GAUSSIAN_NB: GnbParams,
    ModelFamily.DECISION_TREE: TreeParams,
    ModelFamily.LOGISTIC_REGRESSION: LogRegParams,
    ModelFamily.MLP: MlpParams,
}


def train(
    family: ModelFamily,
    data: Dataset,
    features: Sequence[int],
    *,
    seed: int = 0,
    config: TrainConfig = DEFAULT_TRAIN_CONFIG,
) -> ClassifierModel:
    """Fit one family on the selected feature subset.

    The gradient-trained families (logistic regression, MLP) reject
    single-class data; naive Bayes and the tree degrade to a constant
    predictor instead.
    """
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    features = tuple(sorted(set(int(f) for f in features)))
    if not features:
        raise ValueError("feature subset must be non-empty")
    if any(f < 0 or f >= len(data.feature_names) for f in features):
        raise ValueError(f"feature indices out of range: {features}")

    X = data.matrix()
    y = data.labels()
    nak, ack = data.class_counts()
    if (nak == 0 or ack == 0) and family in (
        ModelFamily.LOGISTIC_REGRESSION,
        ModelFamily.MLP,
    ):
        raise ValueError(f"{family.value} requires both classes in the training data")

    if family is ModelFamily.GAUSSIAN_NB:
        params: object = _fit_gnb(X, y, features, config)
    elif family is ModelFamily.DECISION_TREE:
        params = _fit_tree(X, y, features, config)
    elif family is ModelFamily.LOGISTIC_REGRESSION:
        params = _fit_logreg(X, y, features, config)
    elif family is ModelFamily.MLP:
        params = _fit_mlp_params(X, y, features, config, seed)
    else:
        raise ValueError(f"unknown family {family!r}")
    return ClassifierModel(family, features, params)


def predict(model: ClassifierModel, features: FeedbackFeatures) -> TrueState:
    """Deterministic label for one observation; posterior ties go to NAK."""
    label = model.predict_label(features.vector())
    return TrueState.ACK if label == ACK_LABEL else TrueState.NAK


def evaluate(model: ClassifierModel, data: Dataset) -> float:
    """Fraction of examples whose prediction matches the label."""
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    predictions = model.predict_many(data.matrix())
    return float(np.mean(predictions == data.labels()))


def save_model(model: ClassifierModel, path: str) -> None:
    """Write a self-describing JSON model file; parameters round-trip
    bit-exactly (floats serialize via repr)."""
    payload = {
        "format": "ncml-classifier",
        "version": 1,
        "family": model.family.value,
        "selected_features": list(model.selected_features),
        "validation_accuracy": model.validation_accuracy,
        "params": model.params.to_dict(),  # type: ignore[attr-defined]
    }
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(payload, stream, indent=1)
        stream.write("\n")


def load_model(path: str) -> ClassifierModel:
    with open(path, "r", encoding="utf-8") as stream:
        payload = json.load(stream)
    if payload.get("format") != "ncml-classifier":
        raise ValueError(f"{path}: not a classifier model file")
    family = ModelFamily(payload["family"])
    params = _PARAMS_CODEC[family].from_dict(payload["params"])
    return ClassifierModel(
        family,
        tuple(payload["selected_features"]),
        params,
        float(payload["validation_accuracy"]),
    )
