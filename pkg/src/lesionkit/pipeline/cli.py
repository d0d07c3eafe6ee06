"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 processing error
(a failed record while ``--strict`` is set).
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..classifiers import ModelFormatError, TrainingDataError, svm_assess
from ..features import write_feature_csv
from .config import ConfigError, PipelineConfig, load_config
from .dataset import SOURCES, DatasetError, DatasetRecord, ingest
from .fixtures import generate_fixtures
from .report import EvaluationError, evaluate, load_report, report_write
from .run import Models, run_batch, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PROCESSING = 0, 1, 2, 3
DATA_ERRORS = (DatasetError, ConfigError, ModelFormatError, TrainingDataError,
               EvaluationError, FileNotFoundError)

log = logging.getLogger("lesionkit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, records: bool = True) -> None:
    p.add_argument("--config", type=Path, help="key/value (INI) configuration file")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--seed", type=int, help="seed for both classifiers")
    p.add_argument("--workers", type=int, help="parallel record workers")
    p.add_argument("--method", choices=("watershed", "snake", "merged"),
                   help="mask used for features and the overlay")
    p.add_argument("--roc-source", choices=("cascade", "ann"), dest="roc_source")
    p.add_argument("--strict", action="store_true", help="exit 3 if any record fails")
    p.add_argument("-v", "--verbose", action="store_true")
    if records:
        p.add_argument("--dataset", type=Path, help="dataset directory")
        p.add_argument("--manifest", type=Path, help="CSV manifest (id,image,mask,label)")
        p.add_argument("--source", choices=SOURCES, default=None)
        p.add_argument("--image", type=Path, help="single input image")
        p.add_argument("--mask", type=Path, help="ground-truth mask for --image")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lesionkit", description="Dermoscopy lesion segmentation and risk scoring")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("segment", help="write watershed, snake and merged masks")
    _common(p)
    p = sub.add_parser("features", help="extract the 73-value feature vector per record")
    _common(p)
    p = sub.add_parser("train", help="fit and save the SVM and network models")
    _common(p)
    p = sub.add_parser("classify", help="assess records with saved models")
    _common(p)
    p.add_argument("--models", type=Path, required=True, help="directory with model files")
    p.add_argument("--svm-only", action="store_true",
                   help="diagnostic: report the SVM stage alone (Medium left unresolved)")
    p = sub.add_parser("evaluate", help="run labeled records and write the report")
    _common(p)
    p.add_argument("--models", type=Path, required=True)
    p = sub.add_parser("report", help="re-render report files from a saved report.json")
    _common(p, records=False)
    p.add_argument("--evaluation", type=Path, required=True, help="path to report.json")
    p = sub.add_parser("fixtures", help="generate the synthetic lesion corpus")
    _common(p, records=False)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--size", type=int, default=128)
    return parser


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    updates = {}
    for key in ("workers", "method", "roc_source"):
        if getattr(args, key, None) is not None:
            updates[key] = getattr(args, key)
    if args.out is not None:
        updates["output_dir"] = str(args.out)
    if args.strict:
        updates["strict"] = True
    return replace(cfg, **updates) if updates else cfg


def _records(args) -> list[DatasetRecord]:
    given = [x for x in (args.dataset, args.manifest, args.image) if x is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --dataset, --manifest or --image")
    if args.image is not None:
        if not args.image.is_file():
            raise DatasetError(f"{args.image}: image not found")
        if args.mask is not None and not args.mask.is_file():
            raise DatasetError(f"{args.mask}: mask not found")
        return [DatasetRecord(args.image.stem, args.image, args.mask, None, "custom")]
    if args.dataset is not None:
        return ingest(args.dataset, args.source or "ph2")
    return ingest(args.manifest, args.source or "custom")


def _finish(arts, cfg: PipelineConfig) -> int:
    failed = [a for a in arts if not a.ok]
    for a in failed:
        print(f"{a.id}: failed at {a.failed_stage}: {a.error}", file=sys.stderr)
    print(f"{len(arts) - len(failed)}/{len(arts)} records processed into {cfg.output_dir}")
    return EXIT_PROCESSING if failed and cfg.strict else EXIT_OK


def _cmd_segment(args, cfg):
    arts = run_batch(_records(args), cfg)
    return _finish(arts, cfg)


def _cmd_features(args, cfg):
    arts = run_batch(_records(args), cfg)
    write_feature_csv(Path(cfg.output_dir) / "features.csv",
                      [(a.id, a.features) for a in arts if a.ok])
    return _finish(arts, cfg)


def _cmd_train(args, cfg):
    models = train(_records(args), cfg, Path(cfg.output_dir))
    print(f"selected {len(models.svm.selected)} features; models written to {cfg.output_dir}")
    return EXIT_OK


def _cmd_classify(args, cfg):
    models = Models.load(args.models)
    arts = run_batch(_records(args), cfg, models)
    rows = []
    for a in arts:
        if not a.ok:
            continue
        res = svm_assess(models.svm, a.features) if args.svm_only else a.assessment
        rows.append((a.id, repr(res.probability_pct), res.level.value, res.stage.value))
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "assessments.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("id", "probability_pct", "level", "stage"))
        w.writerows(rows)
    for r in rows:
        print(f"{r[0]}: {r[2]} ({float(r[1]):.1f}%, {r[3]})")
    return _finish(arts, cfg)


def _cmd_evaluate(args, cfg):
    models = Models.load(args.models)
    rep = evaluate(_records(args), cfg, models)
    report_write(rep, cfg.output_dir, cfg.precision)
    print(f"accuracy {rep.accuracy:.4f}  auc {rep.auc:.4f}  ({rep.confusion.total} records)")
    if rep.failures and cfg.strict:
        return EXIT_PROCESSING
    return EXIT_OK


def _cmd_report(args, cfg):
    rep = load_report(args.evaluation)
    for p in report_write(rep, cfg.output_dir, cfg.precision):
        print(p)
    return EXIT_OK


def _cmd_fixtures(args, cfg):
    if args.per_class < 2 or args.size < 64:
        raise UsageError("--per-class must be >= 2 and --size >= 64")
    manifest = generate_fixtures(cfg.output_dir, args.per_class, args.size,
                                 args.seed if args.seed is not None else 0)
    print(manifest)
    return EXIT_OK


COMMANDS = {
    "segment": _cmd_segment, "features": _cmd_features, "train": _cmd_train,
    "classify": _cmd_classify, "evaluate": _cmd_evaluate, "report": _cmd_report,
    "fixtures": _cmd_fixtures,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lesionkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"lesionkit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError) as exc:
        print(f"lesionkit: processing error: {exc}", file=sys.stderr)
        return EXIT_PROCESSING


if __name__ == "__main__":
    sys.exit(main())
