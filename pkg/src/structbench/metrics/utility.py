"""Downstream utility: train on one table, score on a held-out real test table.

Features are preprocessed with statistics fitted on the training table.
Classification is scored by balanced accuracy in percent over the classes
present in the test set. Regression is scored by RMSE in units of the test
target's standard deviation.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Protocol, Sequence

import numpy as np
from scipy import optimize, special
from scipy.spatial import cKDTree

from ..data.preprocess import fit_preprocessor
from ..data.table import DataTable, check_same_schema
from ..errors import SchemaError, ValidationError


class UtilityMetric(str, enum.Enum):
    BALANCED_ACCURACY_PCT = "balanced_accuracy_pct"
    RMSE = "rmse"


class Predictor(Protocol):
    name: str

    def fit(self, x: np.ndarray, y: np.ndarray, n_classes: Optional[int]) -> "Predictor": ...

    def predict(self, x: np.ndarray) -> np.ndarray: ...


class LinearModel:
    """L2-regularised linear regression or multinomial logistic regression."""

    name = "linear"

    def __init__(self, l2: float = 1e-3, max_iter: int = 500):
        self.l2 = l2
        self.max_iter = max_iter

    def fit(self, x: np.ndarray, y: np.ndarray, n_classes: Optional[int]) -> "LinearModel":
        xb = np.column_stack([x, np.ones(len(x))])
        self.n_classes = n_classes
        penalty = np.eye(xb.shape[1]) * self.l2 * len(x)
        penalty[-1, -1] = 0.0
        if n_classes is None:
            self.coef = np.linalg.solve(xb.T @ xb + penalty, xb.T @ y)
            return self
        onehot = np.eye(n_classes)[y]
        d = xb.shape[1]

        def loss(w_flat):
            w = w_flat.reshape(d, n_classes)
            logits = xb @ w
            lse = special.logsumexp(logits, axis=1)
            nll = np.sum(lse) - np.sum(logits * onehot)
            reg = 0.5 * np.sum(w[:-1] ** 2) * self.l2 * len(x)
            prob = np.exp(logits - lse[:, None])
            grad = xb.T @ (prob - onehot)
            grad[:-1] += self.l2 * len(x) * w[:-1]
            return (nll + reg) / len(x), grad.ravel() / len(x)

        res = optimize.minimize(loss, np.zeros(d * n_classes), jac=True, method="L-BFGS-B",
                                options={"maxiter": self.max_iter})
        self.coef = res.x.reshape(d, n_classes)
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        out = np.column_stack([x, np.ones(len(x))]) @ self.coef
        if self.n_classes is None:
            return out
        return np.argmax(out, axis=1)


class KNearest:
    """k-nearest-neighbour majority vote (ties to the lowest code) or mean."""

    name = "knn"

    def __init__(self, k: int = 5):
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k

    def fit(self, x: np.ndarray, y: np.ndarray, n_classes: Optional[int]) -> "KNearest":
        self.tree = cKDTree(x)
        self.y = y
        self.n_classes = n_classes
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        k = min(self.k, len(self.y))
        _, idx = self.tree.query(x, k=k)
        idx = idx.reshape(len(x), k)
        votes = self.y[idx]
        if self.n_classes is None:
            return votes.mean(axis=1)
        counts = np.zeros((len(x), self.n_classes))
        np.add.at(counts, (np.repeat(np.arange(len(x)), k), votes.ravel()), 1.0)
        return np.argmax(counts, axis=1)


def default_predictors() -> list[Predictor]:
    return [LinearModel(), KNearest(5)]


@dataclass(frozen=True)
class UtilityReport:
    per_predictor: Mapping[str, float]
    metric: UtilityMetric
    mean_score: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "metric", UtilityMetric(self.metric))
        object.__setattr__(self, "per_predictor", dict(sorted(self.per_predictor.items())))
        if not self.per_predictor:
            raise ValueError("utility report needs at least one predictor")
        object.__setattr__(self, "mean_score", float(np.mean(list(self.per_predictor.values()))))

    def merged(self, scores: Mapping[str, float]) -> "UtilityReport":
        return UtilityReport({**self.per_predictor, **scores}, self.metric)

    def to_dict(self) -> dict:
        return {"per_predictor": dict(self.per_predictor), "mean_score": self.mean_score, "metric": self.metric.value}

    @classmethod
    def from_dict(cls, d: dict) -> "UtilityReport":
        return cls(d["per_predictor"], d["metric"])


def balanced_accuracy_pct(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Mean recall over the classes present in ``y_true``, in percent."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    recalls = [np.mean(y_pred[y_true == c] == c) for c in np.unique(y_true)]
    return 100.0 * float(np.mean(recalls))


def standardised_rmse(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    sd = float(np.std(y_true))
    err = float(np.sqrt(np.mean((np.asarray(y_pred) - y_true) ** 2)))
    return err / sd if sd > 0 else err


def _xy(train: DataTable, test: DataTable):
    check_same_schema(train, test)
    target = train.target
    if target is None or test.target != target:
        raise SchemaError("utility evaluation needs a shared target column")
    features = [c for c in train.names if c != target]
    for t, what in ((train, "train"), (test, "test")):
        if t.missing_mask(target).any():
            raise SchemaError(f"{what} target has missing values", column=target)
    pre = fit_preprocessor(train, features) if features else None

    def encode(t):
        return pre.transform(t) if pre else np.zeros((len(t), 0))

    return encode(train), train.column(target), encode(test), test.column(target)


def utility_eval(
    train: DataTable,
    test: DataTable,
    predictors: Optional[Sequence[Predictor]] = None,
) -> UtilityReport:
    predictors = list(predictors) if predictors is not None else default_predictors()
    x_tr, y_tr, x_te, y_te = _xy(train, test)
    scores = {}
    if train.is_classification:
        if len(np.unique(y_tr)) < 2:
            raise SchemaError("training target has a single class", column=train.target)
        n_classes = len(train.spec(train.target).categories)
        for p in predictors:
            scores[p.name] = balanced_accuracy_pct(y_te, p.fit(x_tr, y_tr, n_classes).predict(x_te))
        return UtilityReport(scores, UtilityMetric.BALANCED_ACCURACY_PCT)
    mu, sd = float(y_tr.mean()), float(y_tr.std())
    if sd == 0:
        raise SchemaError("training target has zero variance", column=train.target)
    for p in predictors:
        pred = p.fit(x_tr, (y_tr - mu) / sd, None).predict(x_te) * sd + mu
        scores[p.name] = standardised_rmse(y_te, pred)
    return UtilityReport(scores, UtilityMetric.RMSE)


def sidecar_path(predictions_path: str | Path) -> Path:
    return Path(predictions_path).with_suffix(".json")


def ingest_external_predictions(
    csv_text: str,
    sidecar: Mapping | str,
    test: DataTable,
    report: Optional[UtilityReport] = None,
) -> UtilityReport:
    """Score an external predictor's per-row predictions on ``test``.

    ``csv_text`` has columns ``row_index,prediction`` with one row per test
    row; ``sidecar`` is ``{"predictor": name, "task": "classification" |
    "regression"}``. Classification predictions are category labels. The
    score is merged into ``report`` when given.
    """
    meta = json.loads(sidecar) if isinstance(sidecar, str) else dict(sidecar)
    name = meta.get("predictor")
    task = meta.get("task")
    if not isinstance(name, str) or not name:
        raise ValidationError("sidecar needs a predictor name", "$.predictor")
    if task not in ("classification", "regression"):
        raise ValidationError("task must be 'classification' or 'regression'", "$.task")
    if (task == "classification") != test.is_classification:
        raise ValidationError(f"task {task!r} does not match the test table", "$.task")

    rows = list(csv.reader(io.StringIO(csv_text)))
    if not rows or rows[0] != ["row_index", "prediction"]:
        raise SchemaError("predictions header must be 'row_index,prediction'", row=0)
    body = [r for r in rows[1:] if r]
    if len(body) != len(test):
        raise SchemaError(f"expected {len(test)} predictions, got {len(body)}")
    spec = test.spec(test.target)
    lookup = {c: i for i, c in enumerate(spec.categories)}
    pred = np.empty(len(test), dtype=np.int64 if test.is_classification else np.float64)
    seen = np.zeros(len(test), dtype=bool)
    for line, (idx, value) in enumerate(body, start=1):
        try:
            i = int(idx)
        except ValueError:
            raise SchemaError(f"bad row index {idx!r}", row=line) from None
        if not 0 <= i < len(test) or seen[i]:
            raise SchemaError(f"row index {i} out of range or repeated", row=line)
        seen[i] = True
        if test.is_classification:
            if value not in lookup:
                raise SchemaError(f"unknown class label {value!r}", row=line, column="prediction")
            pred[i] = lookup[value]
        else:
            try:
                pred[i] = float(value)
            except ValueError:
                raise SchemaError(f"cannot parse {value!r} as a number", row=line, column="prediction") from None
    y = test.column(test.target)
    if test.is_classification:
        score = {name: balanced_accuracy_pct(y, pred)}
        metric = UtilityMetric.BALANCED_ACCURACY_PCT
    else:
        score = {name: standardised_rmse(y, pred)}
        metric = UtilityMetric.RMSE
    if report is None:
        return UtilityReport(score, metric)
    if report.metric is not metric:
        raise ValidationError("prediction task does not match the report's metric", "$.task")
    return report.merged(score)


def load_external_predictions(path: str | Path, test: DataTable, report: Optional[UtilityReport] = None) -> UtilityReport:
    p = Path(path)
    return ingest_external_predictions(p.read_text(), sidecar_path(p).read_text(), test, report)


__all__ = [
    "KNearest",
    "LinearModel",
    "Predictor",
    "UtilityMetric",
    "UtilityReport",
    "balanced_accuracy_pct",
    "default_predictors",
    "ingest_external_predictions",
    "load_external_predictions",
    "sidecar_path",
    "standardised_rmse",
    "utility_eval",
]
