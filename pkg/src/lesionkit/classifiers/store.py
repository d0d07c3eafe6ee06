"""Versioned JSON model files.

Each file records the feature registry hash it was trained against; loading
a file whose hash does not match the current canonical feature order fails.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..features import ANN_INPUT_NAMES, registry_hash
from .mlp import MlpModel
from .svm import LinearSvmModel, SvmHyper

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=np.float64).ravel()]


def svm_to_dict(model: LinearSvmModel) -> dict:
    return {
        "format": "lesionkit.svm",
        "version": FORMAT_VERSION,
        "registry_hash": registry_hash(),
        "selected": list(model.selected),
        "weights": _floats(model.weights),
        "bias": float(model.bias),
        "feature_min": _floats(model.feature_min),
        "feature_max": _floats(model.feature_max),
        "decision_lo": float(model.decision_lo),
        "decision_hi": float(model.decision_hi),
        "hyper": {
            "C": model.hyper.C,
            "epochs": model.hyper.epochs,
            "learning_rate": model.hyper.learning_rate,
            "seed": model.hyper.seed,
        },
    }


def mlp_to_dict(model: MlpModel) -> dict:
    return {
        "format": "lesionkit.mlp",
        "version": FORMAT_VERSION,
        "registry_hash": registry_hash(),
        "inputs": list(ANN_INPUT_NAMES),
        "topology": [8, 10, 1],
        "activation": "sigmoid",
        "w1": np.asarray(model.w1).tolist(),
        "b1": _floats(model.b1),
        "w2": np.asarray(model.w2).tolist(),
        "b2": _floats(model.b2),
        "feature_min": _floats(model.feature_min),
        "feature_max": _floats(model.feature_max),
        "training": {"seed": model.seed, "learning_rate": model.learning_rate,
                     "epochs": model.epochs},
    }


def _check_header(d: dict, kind: str, path) -> None:
    if d.get("format") != kind:
        raise ModelFormatError(f"{path}: not a {kind} file")
    if d.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported version {d.get('version')!r}")
    if d.get("registry_hash") != registry_hash():
        raise ModelFormatError(f"{path}: feature registry hash does not match this build")


def svm_from_dict(d: dict, path="<dict>") -> LinearSvmModel:
    _check_header(d, "lesionkit.svm", path)
    h = d["hyper"]
    return LinearSvmModel(
        tuple(d["selected"]),
        np.array(d["weights"], dtype=np.float64),
        float(d["bias"]),
        np.array(d["feature_min"], dtype=np.float64),
        np.array(d["feature_max"], dtype=np.float64),
        float(d["decision_lo"]),
        float(d["decision_hi"]),
        SvmHyper(h["C"], h["epochs"], h["learning_rate"], h["seed"]),
    )


def mlp_from_dict(d: dict, path="<dict>") -> MlpModel:
    _check_header(d, "lesionkit.mlp", path)
    if d.get("topology") != [8, 10, 1]:
        raise ModelFormatError(f"{path}: unexpected topology {d.get('topology')!r}")
    t = d["training"]
    return MlpModel(
        np.array(d["w1"], dtype=np.float64),
        np.array(d["b1"], dtype=np.float64),
        np.array(d["w2"], dtype=np.float64),
        np.array(d["b2"], dtype=np.float64),
        np.array(d["feature_min"], dtype=np.float64),
        np.array(d["feature_max"], dtype=np.float64),
        t["seed"], t["learning_rate"], t["epochs"],
    )


def _dump(path, d: dict) -> None:
    Path(path).write_text(json.dumps(d, indent=2) + "\n")


def _load(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: {exc}") from None


def save_svm(path, model: LinearSvmModel) -> None:
    _dump(path, svm_to_dict(model))


def save_mlp(path, model: MlpModel) -> None:
    _dump(path, mlp_to_dict(model))


def load_svm(path) -> LinearSvmModel:
    return svm_from_dict(_load(path), path)


def load_mlp(path) -> MlpModel:
    return mlp_from_dict(_load(path), path)
