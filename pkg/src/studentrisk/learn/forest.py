"""Random-forest feature ranking backed by scikit-learn.

The forest is standard machinery (bootstrap samples, random feature
subsets, Gini impurity), so it rides on a mature implementation; the
ranking contract on top is ours: normalized mean-decrease-in-impurity,
summing to one, sorted descending.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.ensemble import RandomForestClassifier

from .data import Dataset
from ..errors import TrainingError


@dataclass
class ForestModel:
    classifier: RandomForestClassifier
    feature_names: tuple[str, ...]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.classifier.predict(np.asarray(X, dtype=np.float64))

    @property
    def oob_accuracy(self) -> float:
        if not hasattr(self.classifier, "oob_score_"):
            raise TrainingError("forest was fitted without out-of-bag scoring")
        return float(self.classifier.oob_score_)


def rf_fit(
    train: Dataset,
    n_trees: int = 200,
    max_depth: int | None = None,
    seed: int = 0,
    oob: bool = False,
) -> ForestModel:
    """Fit a Gini random forest; deterministic under the seed."""
    if len(np.unique(train.y)) < 2:
        raise TrainingError("training set must contain both classes")
    clf = RandomForestClassifier(
        n_estimators=n_trees,
        criterion="gini",
        max_depth=max_depth,
        random_state=seed,
        oob_score=oob,
        n_jobs=None,
    )
    clf.fit(train.X, train.y)
    return ForestModel(classifier=clf, feature_names=train.feature_names)


@dataclass(frozen=True)
class ImportanceRanking:
    """(feature, importance) pairs, importances summing to 1, descending."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        values = [v for _, v in self.entries]
        if abs(sum(values) - 1.0) > 1e-9:
            raise ValueError(f"importances must sum to 1, got {sum(values)}")
        if any(b > a for a, b in zip(values, values[1:])):
            raise ValueError("importances must be non-increasing")

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.entries]


def rf_importance(model: ForestModel) -> ImportanceRanking:
    """Normalized mean-decrease-in-impurity ranking from a fitted forest."""
    raw = np.asarray(model.classifier.feature_importances_, dtype=np.float64)
    total = raw.sum()
    if total <= 0.0:
        raise TrainingError(
            "forest produced no splits; features carry no variation"
        )
    normalized = raw / total
    order = sorted(
        range(len(normalized)), key=lambda i: (-normalized[i], model.feature_names[i])
    )
    entries = tuple((model.feature_names[i], float(normalized[i])) for i in order)
    return ImportanceRanking(entries=entries)
