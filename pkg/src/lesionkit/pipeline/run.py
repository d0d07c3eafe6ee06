"""Per-record processing, training and batch evaluation."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import raster
from ..classifiers import (
    LinearSvmModel,
    MlpModel,
    RiskAssessment,
    TrainingDataError,
    cascade_assess,
    load_mlp,
    load_svm,
    mlp_assess,
    save_mlp,
    save_svm,
    svm_assess,
    svm_rfe,
    train_mlp,
    train_svm,
)
from ..features import (
    ANN_INPUT_NAMES,
    FEATURE_NAMES,
    FeatureVector,
    LesionMeasurements,
    ann_inputs,
    assemble_features,
    write_feature_csv,
)
from ..preprocess import preprocess
from ..segmentation import segment
from ..similarity import SimilarityReport, compare
from .config import PipelineConfig
from .dataset import DatasetRecord

log = logging.getLogger(__name__)

MASK_KINDS = ("watershed", "snake", "merged")
SVM_FILE = "svm_model.json"
MLP_FILE = "mlp_model.json"


class ProcessingError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message


@dataclass(frozen=True)
class Models:
    svm: LinearSvmModel
    mlp: MlpModel

    def save(self, directory) -> tuple[Path, Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        save_svm(d / SVM_FILE, self.svm)
        save_mlp(d / MLP_FILE, self.mlp)
        return d / SVM_FILE, d / MLP_FILE

    @classmethod
    def load(cls, directory) -> "Models":
        d = Path(directory)
        return cls(load_svm(d / SVM_FILE), load_mlp(d / MLP_FILE))


@dataclass
class RunArtifacts:
    id: str
    label: str | None = None
    files: dict[str, Path] = field(default_factory=dict)
    similarity: dict[str, SimilarityReport] | None = None
    features: FeatureVector | None = None
    measurements: LesionMeasurements | None = None
    prob_truth_mask: float | None = None
    prob_merged_mask: float | None = None
    assessment: RiskAssessment | None = None
    ann_output: float | None = None
    failed_stage: str | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.failed_stage is None


@dataclass(frozen=True)
class Extraction:
    image: np.ndarray
    masks: dict[str, np.ndarray]
    truth: np.ndarray | None
    features: FeatureVector
    measurements: LesionMeasurements


def _stage(name: str, fn, *args):
    try:
        return fn(*args)
    except (ValueError, KeyError, OSError, RuntimeError, ArithmeticError) as exc:
        raise ProcessingError(name, str(exc) or type(exc).__name__) from exc


def extract(record: DatasetRecord, cfg: PipelineConfig) -> Extraction:
    """Load, preprocess, segment and measure one record."""
    img = _stage("load", raster.read_image, record.image_path)
    if img.ndim == 2:
        img = np.repeat(img[..., None], 3, axis=2)
    truth = None
    if record.truth_mask_path is not None:
        truth = _stage("load", raster.read_mask, record.truth_mask_path)
        if truth.shape != img.shape[:2]:
            raise ProcessingError("load", "truth mask and image dimensions differ")
    clean, _ = _stage("preprocess", preprocess, img, cfg.preprocess)
    gray = raster.to_grayscale(clean)
    seg = _stage("segmentation", segment, gray, cfg.watershed, cfg.snake)
    masks = {"watershed": seg.watershed, "snake": seg.snake, "merged": seg.merged}
    fv, meas = _stage("features", assemble_features, clean, masks[cfg.method], cfg.features)
    return Extraction(clean, masks, truth, fv, meas)


def overlay(rgb: np.ndarray, mask: np.ndarray, color=(255, 0, 0)) -> np.ndarray:
    """Draw the mask outline onto a copy of the image."""
    out = np.array(rgb, copy=True)
    out[raster.boundary(mask)] = color
    return out


def _assessment_json(art: RunArtifacts) -> dict:
    a = art.assessment
    d = {
        "id": art.id,
        "label": art.label,
        "diameter_px": art.measurements.diameter_px if art.measurements else None,
        "diameter_mm": art.measurements.diameter_mm if art.measurements else None,
        "similarity": None if art.similarity is None else {
            k: {"ssim": r.ssim_pct, "jaccard": r.jaccard_pct, "dice": r.dice_pct}
            for k, r in art.similarity.items()},
        "prob_truth_mask": art.prob_truth_mask,
        "prob_merged_mask": art.prob_merged_mask,
        "ann_output": art.ann_output,
    }
    if a is not None:
        d["assessment"] = {"probability_pct": a.probability_pct, "level": a.level.value,
                           "stage": a.stage.value, "ann_output": a.ann_output}
    return d


def _classify(art: RunArtifacts, ex: Extraction, models: Models, cfg: PipelineConfig) -> None:
    art.prob_merged_mask = svm_assess(models.svm, ex.features).probability_pct
    art.assessment = cascade_assess(models.svm, models.mlp, ex.features)
    art.ann_output = mlp_assess(models.mlp, ann_inputs(ex.features)).ann_output
    if ex.truth is not None and ex.truth.any():
        try:
            tfv, _ = assemble_features(ex.image, ex.truth, cfg.features)
            art.prob_truth_mask = svm_assess(models.svm, tfv).probability_pct
        except ValueError as exc:
            log.warning("%s: truth-mask features unavailable: %s", art.id, exc)


def run_one(record: DatasetRecord, cfg: PipelineConfig, models: Models | None = None,
            out_root=None) -> RunArtifacts:
    """Process one record and write its artifacts under ``out_root/id/``.

    Without models only segmentation, similarity and features are produced.
    Errors never propagate: the returned artifacts carry the failing stage.
    """
    out = Path(out_root if out_root is not None else cfg.output_dir) / record.id
    art = RunArtifacts(record.id, record.label)
    try:
        out.mkdir(parents=True, exist_ok=True)
        ex = extract(record, cfg)
        art.features, art.measurements = ex.features, ex.measurements
        if ex.truth is not None:
            art.similarity = _stage("similarity", lambda: {
                k: compare(ex.masks[k], ex.truth) for k in MASK_KINDS})
        if models is not None:
            _stage("classification", _classify, art, ex, models, cfg)
        for k in MASK_KINDS:
            art.files[k] = out / f"{k}.png"
            raster.write_mask(art.files[k], ex.masks[k])
        art.files["overlay"] = out / "overlay.png"
        raster.write_image(art.files["overlay"], overlay(ex.image, ex.masks[cfg.method]))
        art.files["features"] = out / "features.csv"
        write_feature_csv(art.files["features"], [(record.id, ex.features)])
        art.files["assessment"] = out / "assessment.json"
        art.files["assessment"].write_text(json.dumps(_assessment_json(art), indent=2) + "\n")
    except ProcessingError as exc:
        art.failed_stage, art.error = exc.stage, exc.message
    except OSError as exc:
        art.failed_stage, art.error = "write", str(exc)
    if not art.ok:
        log.warning("%s failed at %s: %s", record.id, art.failed_stage, art.error)
        try:
            (out / "error.json").write_text(json.dumps(
                {"id": record.id, "stage": art.failed_stage, "error": art.error}, indent=2) + "\n")
        except OSError:
            pass
    return art


def _run_star(args):
    return run_one(*args)


def run_batch(records, cfg: PipelineConfig, models: Models | None = None,
              out_root=None) -> list[RunArtifacts]:
    """Run every record (in parallel when ``cfg.workers > 1``); results are
    sorted by id."""
    jobs = [(r, cfg, models, out_root) for r in records]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_star, jobs))
    else:
        results = [_run_star(j) for j in jobs]
    return sorted(results, key=lambda a: a.id)


@dataclass(frozen=True)
class TrainingSet:
    ids: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray


def training_set(records, cfg: PipelineConfig) -> TrainingSet:
    labeled = sorted((r for r in records if r.label is not None), key=lambda r: r.id)
    ids, rows, ys = [], [], []
    for r in labeled:
        try:
            ex = extract(r, cfg)
        except ProcessingError as exc:
            log.warning("%s skipped for training (%s)", r.id, exc)
            continue
        ids.append(r.id)
        rows.append(ex.features.as_array())
        ys.append(1 if r.is_melanoma else 0)
    y = np.array(ys, dtype=int)
    if (y == 1).sum() < 2 or (y == 0).sum() < 2:
        raise TrainingDataError(
            f"need at least 2 usable labeled records per class, got "
            f"{int((y == 1).sum())} melanoma and {int((y == 0).sum())} non-melanoma")
    return TrainingSet(tuple(ids), np.array(rows), y)


def fit_models(ts: TrainingSet, cfg: PipelineConfig) -> Models:
    target = min(cfg.rfe_target, len(FEATURE_NAMES) - 1)
    rfe = svm_rfe(ts.X, ts.y, cfg.svm, target, FEATURE_NAMES)
    cols = [FEATURE_NAMES.index(n) for n in rfe.selected]
    svm = train_svm(ts.X[:, cols], ts.y, cfg.svm, rfe.selected)
    ann_cols = np.array([ann_inputs(dict(zip(FEATURE_NAMES, row))) for row in ts.X])
    assert ann_cols.shape[1] == len(ANN_INPUT_NAMES)
    mlp = train_mlp(ann_cols, ts.y, cfg.mlp.learning_rate, cfg.mlp.epochs, cfg.mlp.seed)
    return Models(svm, mlp)


def train(records, cfg: PipelineConfig, model_dir=None) -> Models:
    """Extract merged-mask features, select features by SVM-RFE, fit the
    final SVM and the network, and write both model files."""
    models = fit_models(training_set(records, cfg), cfg)
    models.save(model_dir if model_dir is not None else Path(cfg.output_dir) / "models")
    return models
