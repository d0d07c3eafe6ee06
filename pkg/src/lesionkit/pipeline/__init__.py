"""Dataset ingestion, batch orchestration, evaluation reports and the CLI."""
from .config import ConfigError, MlpHyper, PipelineConfig, load_config
from .dataset import DatasetError, DatasetRecord, ingest, read_manifest
from .fixtures import generate_fixtures, synthetic_lesion
from .report import (
    Confusion,
    EvaluationError,
    EvaluationReport,
    confusion_matrix,
    evaluate,
    load_report,
    report_write,
    roc_curve,
    summarize,
    trapezoid_auc,
)
from .run import Models, RunArtifacts, extract, run_batch, run_one, train

__all__ = [
    "ConfigError", "Confusion", "DatasetError", "DatasetRecord", "EvaluationError",
    "EvaluationReport", "MlpHyper", "Models", "PipelineConfig", "RunArtifacts",
    "confusion_matrix", "evaluate", "extract", "generate_fixtures", "ingest",
    "load_config", "load_report", "read_manifest", "report_write", "roc_curve",
    "run_batch", "run_one", "summarize", "synthetic_lesion", "train", "trapezoid_auc",
]
