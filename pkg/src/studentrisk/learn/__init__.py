"""Feature ranking, selection, and pass/fail classifiers."""

from .baselines import BASELINE_KINDS, GaussianNB, baseline_fit_predict, logistic_fit, svm_fit
from .data import (
    FAIL,
    PASS,
    Dataset,
    Metrics,
    Standardizer,
    dataset_from_features,
    evaluate,
    split,
)
from .forest import ForestModel, ImportanceRanking, rf_fit, rf_importance
from .mlp import (
    MlpConfig,
    MlpModel,
    gradient_check,
    init_model,
    loss_and_gradients,
    mlp_fit,
    mlp_predict,
    mlp_train_eval,
)
from .selection import SelectionResult, Trainer, forward_select, mlp_trainer

__all__ = [
    "BASELINE_KINDS",
    "FAIL",
    "PASS",
    "Dataset",
    "ForestModel",
    "GaussianNB",
    "ImportanceRanking",
    "Metrics",
    "MlpConfig",
    "MlpModel",
    "SelectionResult",
    "Standardizer",
    "Trainer",
    "baseline_fit_predict",
    "dataset_from_features",
    "evaluate",
    "forward_select",
    "gradient_check",
    "init_model",
    "logistic_fit",
    "loss_and_gradients",
    "mlp_fit",
    "mlp_predict",
    "mlp_train_eval",
    "mlp_trainer",
    "rf_fit",
    "rf_importance",
    "split",
    "svm_fit",
]
