"""Two-stage risk classification: linear SVM, then a small network for the
cases the SVM leaves indeterminate."""
from .cascade import cascade_assess
from .mlp import MlpModel, gradients, init_model, mlp_assess, mlp_forward, mse_loss, train_mlp
from .risk import Risk, RiskAssessment, Stage, ann_level, svm_level
from .store import ModelFormatError, load_mlp, load_svm, save_mlp, save_svm
from .svm import (
    LinearSvmModel,
    MissingFeatureError,
    RfeResult,
    SvmHyper,
    TrainingDataError,
    fit_bounds,
    fit_linear_svm,
    scale_features,
    svm_assess,
    svm_objective,
    svm_rfe,
    train_svm,
)

__all__ = [
    "LinearSvmModel",
    "MissingFeatureError",
    "MlpModel",
    "ModelFormatError",
    "RfeResult",
    "Risk",
    "RiskAssessment",
    "Stage",
    "SvmHyper",
    "TrainingDataError",
    "ann_level",
    "cascade_assess",
    "fit_bounds",
    "fit_linear_svm",
    "gradients",
    "init_model",
    "load_mlp",
    "load_svm",
    "mlp_assess",
    "mlp_forward",
    "mse_loss",
    "save_mlp",
    "save_svm",
    "scale_features",
    "svm_assess",
    "svm_level",
    "svm_objective",
    "svm_rfe",
    "train_mlp",
    "train_svm",
]
