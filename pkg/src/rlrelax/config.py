"""Experiment configuration and its plain key-value file format.

A config file holds ``key = value`` lines (``#`` comments and blank lines
ignored).  Every key has a default; unknown keys are rejected so typos
fail loudly.  Lists are comma-separated.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, fields

from .agent import TrainConfig
from .env import REWARD_VARIANTS, SCHEMES


class ConfigError(ValueError):
    """Invalid configuration (bad key, bad value, inconsistent settings)."""


@dataclass
class ExperimentConfig:
    """Everything a run needs; see README for per-key documentation."""

    problems: list[str] = field(default_factory=list)
    train_problems: list[str] = field(default_factory=list)  # split/ablate protocols
    test_problems: list[str] = field(default_factory=list)
    dims: list[int] = field(default_factory=lambda: [10])
    pop_size: int = 50
    maxfes_per_dim: int = 50      # evaluation budget is maxfes_per_dim * dim
    runs: int = 10
    seed: int = 0
    lpsr: bool = False
    action_scheme: str = "exponential"
    reward_variant: str = "full"
    mask_state: bool = False
    out_dir: str = "results"
    epochs: int = 50
    lr_start: float = 5e-3
    lr_end: float = 1e-4
    discount: float = 1.0
    target_sync_period: int = 10
    explore_start: float = 0.9
    explore_end: float = 0.05
    explore_fraction: float = 0.8
    buffer_capacity: int = 4096
    batch_size: int = 64
    static_level: float = 0.5     # static baseline's fixed relaxation level
    sched_power: float = 5.0      # tightening exponent of the scheduled baseline
    delta: float = 1e-3
    delta_acc: float = 1e-3
    shift_file: str = ""          # optional shift-data override, see problems.py

    def validate(self) -> None:
        if self.action_scheme not in SCHEMES:
            raise ConfigError(f"action_scheme must be one of {SCHEMES}")
        if self.reward_variant not in REWARD_VARIANTS:
            raise ConfigError(f"reward_variant must be one of {REWARD_VARIANTS}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.pop_size < 4:
            raise ConfigError("pop_size must be >= 4")
        for d in self.dims:
            if self.maxfes_per_dim * d < 2 * self.pop_size:
                raise ConfigError(
                    f"budget {self.maxfes_per_dim}*{d} is below two generations "
                    f"of pop_size {self.pop_size}"
                )
        if not 0.0 <= self.static_level <= 1.0:
            raise ConfigError("static_level must be in [0, 1]")
        if self.sched_power <= 0:
            raise ConfigError("sched_power must be positive")

    def maxfes(self, dim: int) -> int:
        return self.maxfes_per_dim * dim

    def train_config(self) -> TrainConfig:
        try:
            return TrainConfig(
                max_epoch=self.epochs,
                lr_start=self.lr_start,
                lr_end=self.lr_end,
                discount=self.discount,
                target_sync_period=self.target_sync_period,
                explore_start=self.explore_start,
                explore_end=self.explore_end,
                explore_fraction=self.explore_fraction,
                buffer_capacity=self.buffer_capacity,
                batch_size=self.batch_size,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def problem_set_hash(self) -> int:
        """Stable fingerprint of (training problems, dims) for checkpoints."""
        names = self.train_problems or self.problems
        text = ";".join(f"{n}@{d}" for d in self.dims for n in names)
        return zlib.crc32(text.encode())


_LIST_STR_KEYS = {"problems", "train_problems", "test_problems"}
_LIST_INT_KEYS = {"dims"}
_BOOL_KEYS = {"lpsr", "mask_state"}


def _parse_value(key: str, raw: str, target_type: type):
    raw = raw.strip()
    if key in _LIST_STR_KEYS:
        return [v.strip() for v in raw.split(",") if v.strip()]
    if key in _LIST_INT_KEYS:
        return [int(v) for v in raw.split(",") if v.strip()]
    if key in _BOOL_KEYS:
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if target_type is int:
        return int(raw)
    if target_type is float:
        return float(raw)
    return raw


def parse_config_text(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    known = {f.name: f.type for f in fields(ExperimentConfig)}
    types = {f.name: type(getattr(cfg, f.name)) for f in fields(ExperimentConfig)}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            setattr(cfg, key, _parse_value(key, raw, types[key]))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())
