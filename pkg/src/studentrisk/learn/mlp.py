"""Three-hidden-layer perceptron trained by mini-batch gradient descent.

Rectifier hidden units, a single logistic output for P(Fail), binary
cross-entropy loss computed from logits for numerical stability. Inputs
are expected to be z-scored with training-split statistics. Everything is
plain numpy so gradients stay inspectable and runs are bit-reproducible
under a seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, Metrics, Standardizer, evaluate
from ..errors import TrainingError

DEFAULT_HIDDEN = (32, 16, 8)
PROB_EPS = 1e-12


@dataclass(frozen=True)
class MlpConfig:
    hidden_widths: tuple[int, ...] = DEFAULT_HIDDEN
    learning_rate: float = 0.05
    momentum: float = 0.9
    epochs: int = 300
    batch_size: int = 32

    def __post_init__(self):
        if len(self.hidden_widths) != 3:
            raise ValueError("the network uses exactly three hidden layers")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError("hidden widths must be positive")


@dataclass
class MlpModel:
    """Weight/bias pairs for the three hidden layers plus the output unit."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[0]

    def copy(self) -> "MlpModel":
        return MlpModel(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


def init_model(n_features: int, hidden_widths: tuple[int, ...], rng: np.random.Generator) -> MlpModel:
    widths = [n_features, *hidden_widths, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        scale = np.sqrt(2.0 / fan_in)  # He init for rectifier layers
        weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights=weights, biases=biases)


def _forward(model: MlpModel, X: np.ndarray):
    """Returns (logits, per-layer activations, per-layer pre-activations)."""
    activations = [X]
    pre_acts = []
    a = X
    n_layers = len(model.weights)
    for k, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ W + b
        pre_acts.append(z)
        if k < n_layers - 1:
            a = np.maximum(z, 0.0)
            activations.append(a)
    logits = pre_acts[-1][:, 0]
    return logits, activations, pre_acts


def _bce_from_logits(logits: np.ndarray, y: np.ndarray) -> float:
    # mean of max(z,0) - z*y + log(1 + exp(-|z|)); stable for large |z|
    return float(
        np.mean(np.maximum(logits, 0.0) - logits * y + np.log1p(np.exp(-np.abs(logits))))
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_gradients(model: MlpModel, X: np.ndarray, y: np.ndarray):
    """Mean BCE loss and its gradients w.r.t. every weight and bias."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    logits, activations, pre_acts = _forward(model, X)
    loss = _bce_from_logits(logits, y)

    n = X.shape[0]
    grad_w = [np.zeros_like(w) for w in model.weights]
    grad_b = [np.zeros_like(b) for b in model.biases]

    delta = ((_sigmoid(logits) - y) / n)[:, None]
    for k in range(len(model.weights) - 1, -1, -1):
        grad_w[k] = activations[k].T @ delta
        grad_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ model.weights[k].T) * (pre_acts[k - 1] > 0.0)
    return loss, grad_w, grad_b


def mlp_fit(train: Dataset, config: MlpConfig, seed: int) -> MlpModel:
    """Train with classical momentum; deterministic under the seed."""
    if train.n_rows == 0:
        raise TrainingError("training set is empty")
    if len(np.unique(train.y)) < 2:
        raise TrainingError("training set must contain both classes")
    rng = np.random.default_rng(seed)
    model = init_model(train.n_features, config.hidden_widths, rng)
    velocity_w = [np.zeros_like(w) for w in model.weights]
    velocity_b = [np.zeros_like(b) for b in model.biases]

    X, y = train.X, train.y.astype(np.float64)
    n = train.n_rows
    batch = min(config.batch_size, n)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start:start + batch]
            # divergence surfaces as a non-finite loss, reported below
            with np.errstate(over="ignore", invalid="ignore"):
                loss, grad_w, grad_b = loss_and_gradients(model, X[rows], y[rows])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            for k in range(len(model.weights)):
                velocity_w[k] = config.momentum * velocity_w[k] - config.learning_rate * grad_w[k]
                velocity_b[k] = config.momentum * velocity_b[k] - config.learning_rate * grad_b[k]
                model.weights[k] += velocity_w[k]
                model.biases[k] += velocity_b[k]
    return model


def mlp_predict(model: MlpModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(P(Fail) strictly inside (0,1), labels with Fail at p >= 0.5)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_inputs:
        raise TrainingError(
            f"input has {X.shape[1] if X.ndim == 2 else '?'} columns, "
            f"model expects {model.n_inputs}"
        )
    logits, _, _ = _forward(model, X)
    probs = np.clip(_sigmoid(logits), PROB_EPS, 1.0 - PROB_EPS)
    labels = (probs >= 0.5).astype(np.int64)
    return probs, labels


def gradient_check(
    model: MlpModel,
    X: np.ndarray,
    y: np.ndarray,
    n_probes: int = 20,
    seed: int = 0,
    step: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients."""
    rng = np.random.default_rng(seed)
    _, grad_w, grad_b = loss_and_gradients(model, X, y)
    params = [(k, "w") for k in range(len(model.weights))] + [
        (k, "b") for k in range(len(model.biases))
    ]
    worst = 0.0
    for _ in range(n_probes):
        k, which = params[rng.integers(len(params))]
        tensor = model.weights[k] if which == "w" else model.biases[k]
        analytic = grad_w[k] if which == "w" else grad_b[k]
        flat = rng.integers(tensor.size)
        idx = np.unravel_index(flat, tensor.shape)
        original = tensor[idx]
        tensor[idx] = original + step
        up = loss_and_gradients(model, X, y)[0]
        tensor[idx] = original - step
        down = loss_and_gradients(model, X, y)[0]
        tensor[idx] = original
        numeric = (up - down) / (2.0 * step)
        denom = max(abs(numeric), abs(analytic[idx]), 1e-8)
        worst = max(worst, abs(numeric - analytic[idx]) / denom)
    return worst


def mlp_train_eval(
    train: Dataset, test: Dataset, config: MlpConfig, seed: int
) -> Metrics:
    """Standardize on train statistics, fit, and score the test split."""
    scaler = Standardizer().fit(train.X)
    std_train = Dataset(scaler.transform(train.X), train.y, train.feature_names)
    model = mlp_fit(std_train, config, seed)
    _, predicted = mlp_predict(model, scaler.transform(test.X))
    return evaluate(predicted, test.y)
