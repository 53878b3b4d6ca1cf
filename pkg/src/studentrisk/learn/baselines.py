"""Comparison classifiers: Gaussian naive Bayes, logistic regression,
and a linear hinge-loss SVM. All trained by plain deterministic
(sub)gradient descent on numpy arrays; LR and SVM see z-scored inputs,
NB works on raw counts."""

from __future__ import annotations

import numpy as np

from .data import FAIL, Dataset, Metrics, Standardizer, evaluate
from ..errors import TrainingError

BASELINE_KINDS = ("naive_bayes", "logistic_regression", "linear_svm")

VAR_FLOOR = 1e-9


def _check_two_classes(y: np.ndarray) -> None:
    if len(np.unique(y)) < 2:
        raise TrainingError("training set must contain both classes")


class GaussianNB:
    def fit(self, X: np.ndarray, y: np.ndarray) -> "GaussianNB":
        _check_two_classes(y)
        self.classes_ = np.unique(y)
        self.log_prior_ = np.log(
            np.array([np.mean(y == c) for c in self.classes_])
        )
        self.mean_ = np.array([X[y == c].mean(axis=0) for c in self.classes_])
        var = np.array([X[y == c].var(axis=0) for c in self.classes_])
        self.var_ = np.maximum(var, VAR_FLOOR)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        log_like = np.stack(
            [
                -0.5 * np.sum(
                    np.log(2.0 * np.pi * self.var_[k])
                    + (X - self.mean_[k]) ** 2 / self.var_[k],
                    axis=1,
                )
                for k in range(len(self.classes_))
            ],
            axis=1,
        )
        joint = log_like + self.log_prior_
        joint -= joint.max(axis=1, keepdims=True)
        probs = np.exp(joint)
        return probs / probs.sum(axis=1, keepdims=True)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


def logistic_fit(
    X: np.ndarray,
    y: np.ndarray,
    learning_rate: float = 0.1,
    epochs: int = 500,
    l2: float = 0.0,
) -> tuple[np.ndarray, float]:
    """Full-batch gradient descent on mean BCE; returns (weights, bias)."""
    _check_two_classes(y)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    yf = y.astype(np.float64)
    for _ in range(epochs):
        z = X @ w + b
        p = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
        err = (p - yf) / n
        w -= learning_rate * (X.T @ err + l2 * w)
        b -= learning_rate * err.sum()
    return w, b


def svm_fit(
    X: np.ndarray,
    y: np.ndarray,
    learning_rate: float = 0.05,
    epochs: int = 500,
    l2: float = 1e-3,
) -> tuple[np.ndarray, float]:
    """Sub-gradient descent on mean hinge loss with L2 on the weights."""
    _check_two_classes(y)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    signs = np.where(y == FAIL, 1.0, -1.0)
    for _ in range(epochs):
        margins = signs * (X @ w + b)
        active = margins < 1.0
        grad_w = l2 * w - (signs[active, None] * X[active]).sum(axis=0) / n
        grad_b = -signs[active].sum() / n
        w -= learning_rate * grad_w
        b -= learning_rate * grad_b
    return w, b


def _linear_predict(X: np.ndarray, w: np.ndarray, b: float) -> np.ndarray:
    return (X @ w + b >= 0.0).astype(np.int64)


def baseline_fit_predict(
    kind: str, train: Dataset, test: Dataset, seed: int = 0
) -> Metrics:
    """Train one baseline and score the test split.

    The seed is accepted for interface symmetry; these solvers start from
    zeros and are deterministic regardless.
    """
    _check_two_classes(train.y)
    if kind == "naive_bayes":
        model = GaussianNB().fit(train.X, train.y)
        predicted = model.predict(test.X)
        return evaluate(predicted, test.y)
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline {kind!r}; expected one of {BASELINE_KINDS}")
    scaler = Standardizer().fit(train.X)
    X_train = scaler.transform(train.X)
    X_test = scaler.transform(test.X)
    if kind == "logistic_regression":
        w, b = logistic_fit(X_train, train.y)
    else:
        w, b = svm_fit(X_train, train.y)
    return evaluate(_linear_predict(X_test, w, b), test.y)
