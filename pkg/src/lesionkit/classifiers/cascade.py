from __future__ import annotations

from dataclasses import replace

from ..features import ann_inputs
from . import mlp as _mlp
from .risk import Risk, RiskAssessment, Stage
from .svm import LinearSvmModel, svm_assess


def cascade_assess(svm: LinearSvmModel, mlp: _mlp.MlpModel, F) -> RiskAssessment:
    """SVM first; indeterminate (Medium) cases go to the network."""
    first = svm_assess(svm, F)
    if first.level is not Risk.MEDIUM:
        return first
    second = _mlp.mlp_assess(mlp, ann_inputs(F))
    return replace(second, stage=Stage.CASCADE)
