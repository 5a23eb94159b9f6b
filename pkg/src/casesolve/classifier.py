"""Single-turn vs multi-turn case classification.

A logistic head over frozen embeddings stands in for an encoder fine-tune:
same pipeline role, same 0.1 decision threshold, trainable on a desk.
Training is deterministic (zero init, fixed data order, full-batch
gradient descent), so tests and retrains reproduce exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .clients import Embedder
from .errors import ConfigError, TrainingError
from .models import MULTI_TURN, SINGLE_TURN, SupportCase
from .preprocess import clean_text, concat_case

_LABELS = (SINGLE_TURN, MULTI_TURN)


@dataclass(frozen=True)
class LabeledCase:
    text: str
    label: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("text must be nonempty")
        if self.label not in _LABELS:
            raise ValueError(f"label must be one of {_LABELS}, got {self.label!r}")


@dataclass(frozen=True)
class TrainingParams:
    epochs: int = 800
    learning_rate: float = 2.0
    l2: float = 1e-4


@dataclass(frozen=True)
class LinearTurnModel:
    """Logistic-regression parameters over a fixed embedder."""

    weights: tuple[float, ...]
    bias: float
    embedder_id: str
    threshold: float = 0.1

    def __post_init__(self) -> None:
        if not all(math.isfinite(w) for w in self.weights) or not math.isfinite(self.bias):
            raise ValueError("model parameters must be finite")

    @classmethod
    def zeros(cls, dim: int, embedder_id: str, threshold: float = 0.1) -> "LinearTurnModel":
        return cls(weights=(0.0,) * dim, bias=0.0, embedder_id=embedder_id, threshold=threshold)

    def save(self, path: str | Path) -> None:
        payload = {
            "weights": list(self.weights),
            "bias": self.bias,
            "embedder_id": self.embedder_id,
            "threshold": self.threshold,
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LinearTurnModel":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            weights=tuple(float(w) for w in raw["weights"]),
            bias=float(raw["bias"]),
            embedder_id=str(raw["embedder_id"]),
            threshold=float(raw.get("threshold", 0.1)),
        )


def augment_training_views(case: SupportCase, label: str) -> list[LabeledCase]:
    """Two training views per case: subject+description, and subject alone.

    Doubles the training set so the model also learns from the terse
    subject-only signal an agent sees first.
    """
    subject = clean_text(case.subject)
    if not subject:
        raise ValueError(f"case {case.case_id}: subject empty after cleaning")
    description = clean_text(case.description)
    return [
        LabeledCase(text=concat_case(subject, description), label=label),
        LabeledCase(text=subject, label=label),
    ]


def load_training_file(path: str | Path) -> list[LabeledCase]:
    """Read JSONL rows ``{"text": ..., "label": ...}``."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            rows.append(LabeledCase(text=str(raw["text"]), label=str(raw["label"])))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return rows


def train_linear_head(
    data: Sequence[LabeledCase],
    embedder: Embedder,
    hyper: TrainingParams = TrainingParams(),
) -> LinearTurnModel:
    """Fit logistic regression on embedded texts by full-batch gradient descent.

    Minimizes L2-regularized log-loss from a zero initialization in the
    given data order; repeated runs produce identical parameters.
    """
    labels = {row.label for row in data}
    if len(labels) < 2:
        raise TrainingError(f"training data must contain both labels, got {sorted(labels)}")

    X = np.stack([embedder.embed(row.text) for row in data])
    y = np.array([1.0 if row.label == SINGLE_TURN else 0.0 for row in data])
    n, dim = X.shape

    w = np.zeros(dim)
    b = 0.0
    for _ in range(hyper.epochs):
        p = _sigmoid(X @ w + b)
        error = p - y
        grad_w = X.T @ error / n + hyper.l2 * w
        grad_b = float(np.mean(error))
        w -= hyper.learning_rate * grad_w
        b -= hyper.learning_rate * grad_b

    return LinearTurnModel(weights=tuple(float(v) for v in w), bias=b, embedder_id=embedder.embedder_id)


def _sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def score_single_turn(text: str, model: LinearTurnModel, embedder: Embedder) -> float:
    """Probability the case is single-turn: sigmoid(w . embed(text) + b)."""
    if embedder.dim != len(model.weights):
        raise ConfigError(
            f"model dimension {len(model.weights)} does not match embedder dimension {embedder.dim}"
        )
    z = float(np.dot(np.asarray(model.weights), embedder.embed(text))) + model.bias
    return float(_sigmoid(z))


def classify(score: float, threshold: float) -> str:
    """single_turn iff score >= threshold; the boundary favors recall."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    return SINGLE_TURN if score >= threshold else MULTI_TURN


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean 2PR/(P+R); zero when both are zero."""
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def classifier_metrics(
    predictions: Iterable[str], labels: Iterable[str]
) -> dict[str, float]:
    """Binary precision/recall/F1 with single_turn as the positive class.

    ``positive_rate`` is the actual positive-class proportion of the labels.
    """
    preds = list(predictions)
    gold = list(labels)
    if not preds or len(preds) != len(gold):
        raise ValueError(f"predictions and labels must be equal-length and nonempty: {len(preds)} vs {len(gold)}")

    tp = sum(1 for p, g in zip(preds, gold) if p == SINGLE_TURN and g == SINGLE_TURN)
    fp = sum(1 for p, g in zip(preds, gold) if p == SINGLE_TURN and g == MULTI_TURN)
    fn = sum(1 for p, g in zip(preds, gold) if p == MULTI_TURN and g == SINGLE_TURN)

    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1_score(precision, recall),
        "positive_rate": sum(1 for g in gold if g == SINGLE_TURN) / len(gold),
    }
