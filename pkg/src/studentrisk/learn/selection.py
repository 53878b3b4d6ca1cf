"""Greedy forward feature selection driven by an importance ranking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .data import Dataset, Metrics, split
from .mlp import MlpConfig, mlp_train_eval

# trainer(train, test, seed) -> Metrics on the test split
Trainer = Callable[[Dataset, Dataset, int], Metrics]


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[str, ...]
    trajectory: tuple[float, ...]


def forward_select(
    dataset: Dataset,
    ranking_names: list[str],
    trainer: Trainer,
    seed: int,
    train_fraction: float = 0.8,
) -> SelectionResult:
    """Add features from most to least important until accuracy stops rising.

    Trains on the top-k feature columns for k = 1, 2, ... over one fixed
    stratified split, stopping at the first step whose test accuracy is
    not strictly greater than the previous step's. The trajectory records
    every accuracy observed, including the step that triggered the stop.
    """
    missing = set(dataset.feature_names) - set(ranking_names)
    if missing:
        raise ValueError(f"ranking does not cover features: {sorted(missing)}")
    order = [name for name in ranking_names if name in set(dataset.feature_names)]

    train, test = split(dataset, train_fraction, seed)
    trajectory: list[float] = []
    best_k = 0
    for k in range(1, len(order) + 1):
        top_k = order[:k]
        metrics = trainer(
            train.select_features(top_k), test.select_features(top_k), seed
        )
        trajectory.append(metrics.accuracy)
        if k > 1 and trajectory[-1] <= trajectory[-2]:
            best_k = k - 1
            break
        best_k = k
    return SelectionResult(
        selected=tuple(order[:best_k]), trajectory=tuple(trajectory)
    )


def mlp_trainer(config: MlpConfig) -> Trainer:
    """The default selection trainer: the MLP at a fixed configuration."""

    def train_eval(train: Dataset, test: Dataset, seed: int) -> Metrics:
        return mlp_train_eval(train, test, config, seed)

    return train_eval
