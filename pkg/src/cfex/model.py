"""Multinomial logistic regression trained by full-batch gradient descent.

Cohorts here are tens of records, so the optimizer favors stability over
speed: deterministic zero initialization, analytic gradients, and a
backtracking step size that guarantees the training loss never increases.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import StandardScaler, fit_scaler
from .errors import (
    EmptyDatasetError,
    NonFiniteLossError,
    SchemaMismatchError,
    SingleClassDatasetError,
)
from .schema import Dataset, FeatureSchema, PatientRecord


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.5
    epochs: int = 600
    l2: float = 1e-3
    seed: int = 0


@dataclass(frozen=True, eq=False)
class Prediction:
    logits: np.ndarray
    probabilities: np.ndarray
    label: str
    class_index: int


@dataclass(frozen=True, eq=False)
class Model:
    """Trained classifier: weights act on standardized features."""

    schema: FeatureSchema
    scaler: StandardScaler
    weights: np.ndarray  # [classes, features]
    bias: np.ndarray  # [classes]
    feature_mad: np.ndarray  # per-feature MAD of the scaled training matrix
    loss_history: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        b = np.asarray(self.bias, dtype=float).copy()
        mad = np.asarray(self.feature_mad, dtype=float).copy()
        if w.shape != (len(self.schema.label_classes), self.schema.n_features):
            raise ValueError("weight matrix shape does not match schema")
        if b.shape != (len(self.schema.label_classes),):
            raise ValueError("bias shape does not match schema")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("model parameters must be finite")
        for arr in (w, b, mad):
            arr.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "feature_mad", mad)

    @property
    def n_classes(self) -> int:
        return len(self.schema.label_classes)

    def logits_scaled(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float) @ self.weights.T + self.bias

    def predict_scaled(self, z: np.ndarray) -> Prediction:
        logits = self.logits_scaled(z)
        probs = softmax(logits)
        idx = int(np.argmax(probs))  # argmax takes the lowest index on ties
        return Prediction(
            logits=logits,
            probabilities=probs,
            label=self.schema.label_classes[idx],
            class_index=idx,
        )

    def predict(self, record: PatientRecord) -> Prediction:
        record.require_conforms(self.schema)
        return self.predict_scaled(self.scaler.transform(record.values))

    def predict_label(self, record: PatientRecord) -> str:
        return self.predict(record).label

    def save(self, path: str | Path) -> None:
        payload = {
            "format": "cfex-model",
            "version": 1,
            "schema": self.schema.to_dict(),
            "schema_digest": self.schema.digest(),
            "scaler": self.scaler.to_dict(),
            "weights": [[float(v) for v in row] for row in self.weights],
            "bias": [float(v) for v in self.bias],
            "feature_mad": [float(v) for v in self.feature_mad],
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Model":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != "cfex-model":
            raise SchemaMismatchError(f"{path} is not a model file")
        schema = FeatureSchema.from_dict(payload["schema"])
        if payload.get("schema_digest") != schema.digest():
            raise SchemaMismatchError("model file schema digest mismatch")
        return cls(
            schema=schema,
            scaler=StandardScaler.from_dict(payload["scaler"]),
            weights=np.array(payload["weights"], dtype=float),
            bias=np.array(payload["bias"], dtype=float),
            feature_mad=np.array(payload["feature_mad"], dtype=float),
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=float)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def cross_entropy_loss(
    weights: np.ndarray, bias: np.ndarray, X: np.ndarray, Y: np.ndarray, l2: float
) -> float:
    logits = X @ weights.T + bias
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    nll = -(Y * log_probs).sum() / X.shape[0]
    return float(nll + 0.5 * l2 * np.sum(weights**2))


def cross_entropy_gradients(
    weights: np.ndarray, bias: np.ndarray, X: np.ndarray, Y: np.ndarray, l2: float
) -> tuple[np.ndarray, np.ndarray]:
    probs = softmax(X @ weights.T + bias)
    residual = probs - Y
    grad_w = residual.T @ X / X.shape[0] + l2 * weights
    grad_b = residual.mean(axis=0)
    return grad_w, grad_b


def _scaled_mad(Z: np.ndarray) -> np.ndarray:
    med = np.median(Z, axis=0)
    mad = np.median(np.abs(Z - med), axis=0)
    return np.where(mad == 0, 1.0, mad)


def train(data: Dataset, config: TrainConfig = TrainConfig()) -> Model:
    """Fit the classifier. Deterministic: zero init, fixed-order full batches.

    The loss is non-increasing by construction (the step is halved whenever a
    trial update would raise it).
    """
    labeled = data.labeled()
    if len(labeled) == 0:
        raise EmptyDatasetError("cannot train on an empty dataset")
    present = {r.label for r in labeled.records}
    if len(present) < 2:
        raise SingleClassDatasetError(f"need >=2 classes, found {sorted(present)}")

    schema = labeled.schema
    scaler = fit_scaler(labeled)
    X = scaler.transform(labeled.matrix())
    y_idx = np.array([schema.class_index(r.label) for r in labeled.records])
    n_classes = len(schema.label_classes)
    Y = np.zeros((len(labeled), n_classes))
    Y[np.arange(len(labeled)), y_idx] = 1.0

    weights = np.zeros((n_classes, schema.n_features))
    bias = np.zeros(n_classes)
    lr = config.learning_rate
    history = []
    loss = cross_entropy_loss(weights, bias, X, Y, config.l2)
    if not np.isfinite(loss):
        raise NonFiniteLossError("initial loss is not finite")
    history.append(loss)

    for _ in range(config.epochs):
        grad_w, grad_b = cross_entropy_gradients(weights, bias, X, Y, config.l2)
        while True:
            new_w = weights - lr * grad_w
            new_b = bias - lr * grad_b
            new_loss = cross_entropy_loss(new_w, new_b, X, Y, config.l2)
            if not np.isfinite(new_loss):
                raise NonFiniteLossError("loss became non-finite during training")
            if new_loss <= loss + 1e-12 or lr < 1e-12:
                break
            lr *= 0.5
        weights, bias, loss = new_w, new_b, new_loss
        history.append(loss)

    return Model(
        schema=schema,
        scaler=scaler,
        weights=weights,
        bias=bias,
        feature_mad=_scaled_mad(X),
        loss_history=tuple(history),
    )


@dataclass(frozen=True)
class ClassCounts:
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class EvaluationMetrics:
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class: dict[str, ClassCounts]
    accuracy: float

    def as_dict(self) -> dict:
        return {
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "per_class": {
                label: {"tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn}
                for label, c in self.per_class.items()
            },
        }


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def evaluate_macro(model: Model, test: Dataset) -> EvaluationMetrics:
    """Macro-averaged precision/recall/F1 over all schema classes.

    Zero-denominator precision/recall is defined as 0 so rare classes count
    against the average instead of being dropped.
    """
    labeled = test.labeled()
    if len(labeled) == 0:
        raise EmptyDatasetError("cannot evaluate on an empty dataset")
    classes = model.schema.label_classes
    y_true = [r.label for r in labeled.records]
    y_pred = [model.predict_label(r) for r in labeled.records]

    per_class, precisions, recalls, f1s = {}, [], [], []
    n = len(y_true)
    correct = sum(t == p for t, p in zip(y_true, y_pred))
    for label in classes:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == label and p == label)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != label and p == label)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == label and p != label)
        tn = n - tp - fp - fn
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class[label] = ClassCounts(tp=tp, fp=fp, fn=fn, tn=tn)
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)

    return EvaluationMetrics(
        macro_precision=float(np.mean(precisions)),
        macro_recall=float(np.mean(recalls)),
        macro_f1=float(np.mean(f1s)),
        per_class=per_class,
        accuracy=correct / n,
    )
