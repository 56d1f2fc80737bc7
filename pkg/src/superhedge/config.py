"""Experiment configuration files.

The format is INI-style text: ``[section]`` headers followed by
``key = value`` lines. Sections are ``market``, ``claim``, ``train`` and
``experiment``; unknown keys are rejected. Lists are comma separated and an
empty value means "unset". See README.md for every key.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path

from .claims import ClaimSpec
from .errors import ConfigError
from .hedger0 import TrainConfig
from .market import MarketModelConfig

MODES = ("oracle", "train-t0", "sweep-lambda", "consumption", "baseline")
DEFAULT_LAMBDAS = (10.0, 50.0, 100.0, 500.0, 1000.0, 2000.0, 4000.0, 10000.0)


@dataclass(frozen=True)
class ExperimentConfig:
    market: MarketModelConfig
    claim: ClaimSpec
    mode: str = "oracle"
    train: TrainConfig = field(default_factory=TrainConfig)
    lambdas: tuple[float, ...] = DEFAULT_LAMBDAS
    lam: float = 10000.0
    beta: float = 500.0
    base_lambda: float = 1024.0
    alphas: tuple[float, ...] = (0.5, 0.6, 2 / 3, 0.7, 0.9, 1.0)
    n_paths: int = 1000
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.beta > 0 or not self.lam > 0 or not self.base_lambda > 0:
            raise ConfigError("lambda, base_lambda and beta must be positive")
        if self.mode == "sweep-lambda" and not self.lambdas:
            raise ConfigError("sweep-lambda needs a non-empty lambdas list")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce(raw: str, default, key: str):
    raw = raw.strip()
    try:
        if isinstance(default, tuple):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            kind = type(default[0]) if default else float
            return tuple(kind(s) for s in items)
        if raw == "":
            return None
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float) or default is None:
            try:
                return float(raw)
            except ValueError:
                return raw
        if isinstance(default, str):
            try:
                return float(raw) if key in ("feature_scale", "price_init") else raw
            except ValueError:
                return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return raw


def _section(cp, name, cls, defaults: dict, rename=None):
    rename = rename or {}
    names = {f.name for f in fields(cls)}
    kwargs = {}
    if cp.has_section(name):
        for key, raw in cp.items(name):
            attr = rename.get(key, key)
            if attr not in names:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            kwargs[attr] = _coerce(raw, defaults.get(attr), key)
    return kwargs


_EXPERIMENT_KEYS = {"lambda": "lam"}


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for sec in cp.sections():
        if sec not in ("market", "claim", "train", "experiment"):
            raise ConfigError(f"unknown section [{sec}]")
    if not cp.has_section("market") or not cp.has_option("market", "kind"):
        raise ConfigError("config needs [market] with a kind")
    mdef = {f.name: f.default for f in fields(MarketModelConfig)}
    market = MarketModelConfig(**_section(cp, "market", MarketModelConfig, mdef))
    cdef = {"kind": "", "strike": 100.0, "barrier": None}
    claim = ClaimSpec(**_section(cp, "claim", ClaimSpec, cdef)) if cp.has_section("claim") else ClaimSpec("european_call")
    tdef = {f.name: f.default for f in fields(TrainConfig)}
    train_kw = _section(cp, "train", TrainConfig, tdef)
    train = TrainConfig(**train_kw)
    edef = {f.name: f.default for f in fields(ExperimentConfig)}
    exp_kw = _section(cp, "experiment", ExperimentConfig, edef, _EXPERIMENT_KEYS)
    for k in ("market", "claim", "train"):
        exp_kw.pop(k, None)
    return ExperimentConfig(market=market, claim=claim, train=train, **exp_kw)


def write_config(cfg: ExperimentConfig) -> str:
    lines = ["[market]"]
    lines += [f"{f.name} = {_fmt(getattr(cfg.market, f.name))}" for f in fields(cfg.market)]
    lines += ["", "[claim]"]
    lines += [f"{f.name} = {_fmt(getattr(cfg.claim, f.name))}" for f in fields(cfg.claim)]
    lines += ["", "[train]"]
    lines += [f"{f.name} = {_fmt(getattr(cfg.train, f.name))}" for f in fields(cfg.train)]
    lines += ["", "[experiment]"]
    inverse = {v: k for k, v in _EXPERIMENT_KEYS.items()}
    for f in fields(cfg):
        if f.name in ("market", "claim", "train"):
            continue
        lines.append(f"{inverse.get(f.name, f.name)} = {_fmt(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(p.read_text())


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(write_config(cfg).encode()).hexdigest()
