from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

SVM_HIGH = 0.40
SVM_MEDIUM = 0.30
ANN_HIGH = 0.5


class Risk(str, Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


class Stage(str, Enum):
    SVM = "svm"
    ANN = "ann"
    CASCADE = "cascade"


@dataclass(frozen=True)
class RiskAssessment:
    probability_pct: float
    level: Risk
    stage: Stage
    ann_output: float | None = None

    @property
    def is_melanoma(self) -> bool:
        return self.level is Risk.HIGH


def svm_level(probability: float) -> Risk:
    """[0, .30) Low, [.30, .40) Medium, [.40, 1] High, checked High first."""
    if probability >= SVM_HIGH:
        return Risk.HIGH
    if probability >= SVM_MEDIUM:
        return Risk.MEDIUM
    return Risk.LOW


def ann_level(output: float) -> Risk:
    return Risk.HIGH if output >= ANN_HIGH else Risk.LOW
