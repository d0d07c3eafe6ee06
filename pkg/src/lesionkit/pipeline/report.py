"""Evaluation over a labeled batch and the CSV/text report files."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from ..classifiers import Risk
from .config import PipelineConfig
from .dataset import MELANOMA
from .run import MASK_KINDS, Models, RunArtifacts, run_batch

SIMILARITY_PREFIX = {"snake": "ac", "watershed": "ws", "merged": "merged"}
SIMILARITY_COLUMNS = ("id",) + tuple(
    f"{SIMILARITY_PREFIX[k]}_{m}" for m in ("ssim", "jaccard", "dice")
    for k in ("snake", "watershed", "merged"))
CLASSIFICATION_COLUMNS = ("id", "prob_truth_mask", "prob_merged_mask", "final_level", "stage",
                          "label", "score")


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Confusion:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0


@dataclass
class EvaluationReport:
    similarity_rows: list[dict] = field(default_factory=list)
    classification_rows: list[dict] = field(default_factory=list)
    confusion: Confusion = field(default_factory=lambda: Confusion(0, 0, 0, 0))
    roc: list[tuple[float, float]] = field(default_factory=list)
    auc: float = 0.0
    accuracy: float = 0.0
    roc_source: str = "ann"
    failures: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["roc"] = [list(p) for p in self.roc]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        return cls(
            similarity_rows=list(d["similarity_rows"]),
            classification_rows=list(d["classification_rows"]),
            confusion=Confusion(**d["confusion"]),
            roc=[tuple(p) for p in d["roc"]],
            auc=d["auc"],
            accuracy=d["accuracy"],
            roc_source=d.get("roc_source", "ann"),
            failures=list(d.get("failures", [])),
        )


def confusion_matrix(truth, predicted) -> Confusion:
    t = np.asarray(truth, dtype=bool)
    p = np.asarray(predicted, dtype=bool)
    return Confusion(int((t & p).sum()), int((t & ~p).sum()),
                     int((~t & p).sum()), int((~t & ~p).sum()))


def roc_curve(truth, scores) -> list[tuple[float, float]]:
    """(fpr, tpr) points from sweeping a ``score >= threshold`` rule over
    every distinct score, from the strictest threshold down.

    The curve always starts at (0, 0) and ends at (1, 1); a rate whose class
    is absent is taken as 0 until the final point.
    """
    t = np.asarray(truth, dtype=bool)
    s = np.asarray(scores, dtype=np.float64)
    pos, neg = int(t.sum()), int((~t).sum())
    pts = [(0.0, 0.0)]
    for thr in np.unique(s)[::-1]:
        hit = s >= thr
        tpr = (hit & t).sum() / pos if pos else 0.0
        fpr = (hit & ~t).sum() / neg if neg else 0.0
        pts.append((float(fpr), float(tpr)))
    if pts[-1] != (1.0, 1.0):
        pts.append((1.0, 1.0))
    return pts


def trapezoid_auc(points) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return float(area)


def summarize(arts: list[RunArtifacts], roc_source: str = "ann") -> EvaluationReport:
    """Aggregate id-sorted run artifacts into report rows and metrics."""
    arts = sorted(arts, key=lambda a: a.id)
    rep = EvaluationReport(roc_source=roc_source)
    truth, pred, scores = [], [], []
    for a in arts:
        if not a.ok:
            rep.failures.append({"id": a.id, "stage": a.failed_stage, "error": a.error})
            continue
        if a.similarity is not None:
            row = {"id": a.id}
            for k in MASK_KINDS:
                r = a.similarity[k]
                p = SIMILARITY_PREFIX[k]
                row.update({f"{p}_ssim": r.ssim_pct, f"{p}_jaccard": r.jaccard_pct,
                            f"{p}_dice": r.dice_pct})
            rep.similarity_rows.append(row)
        if a.assessment is None or a.label is None:
            continue
        score = a.ann_output if roc_source == "ann" else a.assessment.probability_pct / 100.0
        rep.classification_rows.append({
            "id": a.id,
            "prob_truth_mask": a.prob_truth_mask,
            "prob_merged_mask": a.prob_merged_mask,
            "final_level": a.assessment.level.value,
            "stage": a.assessment.stage.value,
            "label": a.label,
            "score": score,
        })
        truth.append(a.label == MELANOMA)
        pred.append(a.assessment.level is Risk.HIGH)
        scores.append(score)
    if not truth:
        raise EvaluationError("no labeled record could be evaluated")
    rep.confusion = confusion_matrix(truth, pred)
    rep.accuracy = rep.confusion.accuracy
    rep.roc = roc_curve(truth, scores)
    rep.auc = trapezoid_auc(rep.roc)
    return rep


def evaluate(records, cfg: PipelineConfig, models: Models, out_root=None) -> EvaluationReport:
    labeled = [r for r in records if r.label is not None]
    if not labeled:
        raise EvaluationError("evaluation needs labeled records")
    arts = run_batch(labeled, cfg, models, out_root)
    return summarize(arts, cfg.roc_source)


def fmt(value, places: int = 1) -> str:
    """Fixed-point text with half-up rounding of the shortest decimal form,
    so 99.85 renders as 99.9."""
    if value is None:
        return ""
    q = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_UP))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def report_write(report: EvaluationReport, out_dir, precision: int = 1) -> list[Path]:
    """Write similarity.csv (when any truth masks were compared),
    classification.csv, confusion.csv, roc.csv, summary.txt and report.json."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise EvaluationError(f"{out}: cannot create report directory: {exc}") from None
    written = []
    try:
        if report.similarity_rows:
            p = out / "similarity.csv"
            _write_csv(p, SIMILARITY_COLUMNS, (
                [r["id"]] + [fmt(r[c], precision) for c in SIMILARITY_COLUMNS[1:]]
                for r in report.similarity_rows))
            written.append(p)
        else:
            (out / "similarity.csv").unlink(missing_ok=True)
        p = out / "classification.csv"
        _write_csv(p, CLASSIFICATION_COLUMNS, (
            [r["id"], fmt(r["prob_truth_mask"], precision), fmt(r["prob_merged_mask"], precision),
             r["final_level"], r["stage"], r["label"], repr(float(r["score"]))]
            for r in report.classification_rows))
        written.append(p)
        c = report.confusion
        p = out / "confusion.csv"
        _write_csv(p, ("actual", "predicted_melanoma", "predicted_non_melanoma"),
                   [("melanoma", c.tp, c.fn), ("non-melanoma", c.fp, c.tn)])
        written.append(p)
        p = out / "roc.csv"
        _write_csv(p, ("fpr", "tpr"), ((repr(x), repr(y)) for x, y in report.roc))
        written.append(p)
        lines = [
            f"records evaluated: {c.total}",
            f"failed records: {len(report.failures)}",
            f"accuracy: {report.accuracy!r}",
            f"auc ({report.roc_source} score): {report.auc!r}",
            f"confusion: TP={c.tp} FN={c.fn} FP={c.fp} TN={c.tn}",
        ]
        if not report.similarity_rows:
            lines.append("similarity.csv omitted: no ground-truth masks were available")
        for f in report.failures:
            lines.append(f"failure {f['id']} at {f['stage']}: {f['error']}")
        p = out / "summary.txt"
        p.write_text("\n".join(lines) + "\n")
        written.append(p)
        p = out / "report.json"
        p.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        written.append(p)
    except OSError as exc:
        raise EvaluationError(f"{out}: cannot write report: {exc}") from None
    return written


def load_report(path) -> EvaluationReport:
    try:
        return EvaluationReport.from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise EvaluationError(f"{path}: cannot read report: {exc}") from None
