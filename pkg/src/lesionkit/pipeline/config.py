"""Pipeline configuration and its INI-style key/value file format.

Example::

    [preprocess]
    hair_threshold = 25
    hair_angles = 0, 45, 90, 135

    [snake]
    alpha = 0.8
    max_iter = 200

    [svm]
    C = 2.0

    [run]
    rfe_target = 15
    roc_source = ann
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, fields, replace

from ..classifiers import SvmHyper
from ..features import FeatureConfig
from ..preprocess import PreprocessConfig
from ..segmentation import EnergyWeights, SnakeConfig, WatershedConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MlpHyper:
    learning_rate: float = 0.5
    epochs: int = 5000
    seed: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    watershed: WatershedConfig = field(default_factory=WatershedConfig)
    snake: SnakeConfig = field(default_factory=SnakeConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    svm: SvmHyper = field(default_factory=SvmHyper)
    mlp: MlpHyper = field(default_factory=MlpHyper)
    rfe_target: int = 20
    method: str = "merged"
    roc_source: str = "ann"
    output_dir: str = "out"
    precision: int = 1
    workers: int = 1
    strict: bool = False

    def __post_init__(self):
        if self.method not in ("watershed", "snake", "merged"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.roc_source not in ("cascade", "ann"):
            raise ConfigError(f"unknown roc source {self.roc_source!r}")
        if self.rfe_target < 1:
            raise ConfigError("rfe_target must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def with_seed(self, seed: int) -> "PipelineConfig":
        return replace(self, svm=replace(self.svm, seed=seed), mlp=replace(self.mlp, seed=seed))


def _convert(raw: str, default, key: str):
    raw = raw.strip()
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if default is None:
            return None if raw.lower() in ("", "none") else float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    return raw


def _apply(obj, section: dict[str, str], where: str):
    known = {f.name: f for f in fields(obj)}
    updates = {}
    for key, raw in section.items():
        if key not in known:
            raise ConfigError(f"[{where}] unknown key {key!r}")
        updates[key] = _convert(raw, getattr(obj, key), f"{where}.{key}")
    try:
        return replace(obj, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}] {exc}") from None


def load_config(path) -> PipelineConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep key case ("C")
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    cfg = PipelineConfig()
    updates = {}
    for name in parser.sections():
        sec = dict(parser[name])
        if name == "run":
            continue
        if name == "snake":
            weight_keys = {f.name for f in fields(EnergyWeights)}
            wsec = {k: v for k, v in sec.items() if k in weight_keys}
            rest = {k: v for k, v in sec.items() if k not in weight_keys}
            snake = _apply(cfg.snake, rest, "snake")
            updates["snake"] = replace(snake, weights=_apply(snake.weights, wsec, "snake"))
        elif name in ("preprocess", "watershed", "features", "svm", "mlp"):
            updates[name] = _apply(getattr(cfg, name), sec, name)
        else:
            raise ConfigError(f"unknown section [{name}]")
    try:
        cfg = replace(cfg, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if parser.has_section("run"):
        top = {k: v for k, v in dict(parser["run"]).items()}
        scalar = {f.name: f for f in fields(cfg) if not dataclasses.is_dataclass(getattr(cfg, f.name))}
        conv = {}
        for k, raw in top.items():
            if k not in scalar:
                raise ConfigError(f"[run] unknown key {k!r}")
            conv[k] = _convert(raw, getattr(cfg, k), f"run.{k}")
        cfg = replace(cfg, **conv)
    return cfg
