"""Datasets, stratified splitting, standardization, and metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diagnostics import CompileFeatureVector
from ..errors import TrainingError
from ..model import Outcome

FAIL = 1  # positive class: predicting failure risk
PASS = 0


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with binary labels (1 = Fail) and column names."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"label count {y.shape} does not match {X.shape[0]} rows")
        if X.shape[1] != len(self.feature_names):
            raise ValueError(
                f"{X.shape[1]} columns but {len(self.feature_names)} feature names"
            )
        if not np.all(np.isfinite(X)):
            raise ValueError("feature matrix contains non-finite entries")
        if not np.isin(y, (PASS, FAIL)).all():
            raise ValueError("labels must be 0 (pass) or 1 (fail)")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def take_rows(self, rows: np.ndarray) -> "Dataset":
        return Dataset(self.X[rows], self.y[rows], self.feature_names)

    def select_features(self, names: list[str]) -> "Dataset":
        index = {name: i for i, name in enumerate(self.feature_names)}
        cols = [index[name] for name in names]
        return Dataset(self.X[:, cols], self.y, tuple(names))


def dataset_from_features(
    features: dict[str, CompileFeatureVector],
    labels: dict[str, Outcome],
    feature_names: tuple[str, ...],
) -> Dataset:
    """Assemble a dataset in lexicographic student order."""
    students = sorted(features)
    missing = [s for s in students if s not in labels]
    if missing:
        raise ValueError(f"students without labels: {missing}")
    X = np.array([features[s].counts for s in students], dtype=np.float64)
    y = np.array(
        [FAIL if labels[s] is Outcome.FAIL else PASS for s in students],
        dtype=np.int64,
    )
    return Dataset(X, y, feature_names)


def split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified shuffle split, deterministic under the seed.

    The train part holds round(n * fraction) rows with each class within
    one row of its proportional share (largest-remainder rounding).
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    classes, counts = np.unique(dataset.y, return_counts=True)
    if len(classes) < 2:
        raise TrainingError("both classes must be present to split")
    if counts.min() < 2:
        raise TrainingError("each class needs at least 2 members to split")

    n_train = int(round(dataset.n_rows * train_fraction))
    floors = {c: int(np.floor(cnt * train_fraction)) for c, cnt in zip(classes, counts)}
    remainders = {
        c: cnt * train_fraction - floors[c] for c, cnt in zip(classes, counts)
    }
    extras = n_train - sum(floors.values())
    for c in sorted(classes, key=lambda c: (-remainders[c], c))[:extras]:
        floors[c] += 1

    rng = np.random.default_rng(seed)
    train_rows: list[int] = []
    test_rows: list[int] = []
    for c in classes:
        members = np.flatnonzero(dataset.y == c)
        order = rng.permutation(len(members))
        shuffled = members[order]
        train_rows.extend(shuffled[: floors[c]].tolist())
        test_rows.extend(shuffled[floors[c]:].tolist())
    train_rows = np.array(sorted(train_rows), dtype=np.int64)
    test_rows = np.array(sorted(test_rows), dtype=np.int64)
    return dataset.take_rows(train_rows), dataset.take_rows(test_rows)


class Standardizer:
    """Z-score transform whose statistics come from the training split only."""

    def __init__(self):
        self.mean_: np.ndarray | None = None
        self.std_: np.ndarray | None = None

    def fit(self, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        std[std < 1e-9] = 1.0  # constant columns pass through untouched
        self.std_ = std
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.mean_ is None:
            raise TrainingError("standardizer used before fitting")
        return (np.asarray(X, dtype=np.float64) - self.mean_) / self.std_


@dataclass(frozen=True)
class Metrics:
    """Test accuracy and recall of the Fail class (None when no Fail rows)."""

    accuracy: float
    recall: float | None


def evaluate(predicted: np.ndarray, true: np.ndarray) -> Metrics:
    predicted = np.asarray(predicted, dtype=np.int64)
    true = np.asarray(true, dtype=np.int64)
    if predicted.shape != true.shape or predicted.size == 0:
        raise ValueError("predictions and labels must be equal-length and non-empty")
    accuracy = float(np.mean(predicted == true))
    fail_rows = true == FAIL
    if not fail_rows.any():
        return Metrics(accuracy=accuracy, recall=None)
    recall = float(np.mean(predicted[fail_rows] == FAIL))
    return Metrics(accuracy=accuracy, recall=recall)
