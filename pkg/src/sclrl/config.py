"""Run configuration: flat ``key = value`` files with CLI overrides.

Lines starting with ``#`` are comments. Every field has a default; the
defaults encode the standard operating point (one hop, three sampled
neighbors, masking probability 0.2, 128-dimensional embeddings, batch
size 128).
"""

from __future__ import annotations

import dataclasses
import os
import typing
from dataclasses import dataclass

from .augment import ATTR_SIMILARITY, IDENTICAL, KINDS, AugmentorSpec
from .contrast import LOSS_MODES, TrainConfig
from .errors import ConfigError
from .subgraph import SamplerConfig


@dataclass
class RunConfig:
    # dataset: either the citation pair or the generic pair
    content_path: str = ""
    cites_path: str = ""
    edges_path: str = ""
    features_path: str = ""
    out_dir: str = "run"
    # link sampling
    link_fraction: float = 0.4
    seed: int = 1
    # subgraph sampling
    hops: int = 1
    k_per_hop: tuple = (3,)
    # augmentation
    aug1: str = IDENTICAL
    aug2: str = ATTR_SIMILARITY
    aug_p: float = 0.2
    knn_k: int = 3
    resample_augmentors: bool = False
    # training
    batch_size: int = 128
    temperature: float = 0.5
    epochs: int = 50
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    loss_mode: str = "paper"
    refresh_views: bool = True
    hidden_dim: int = 128
    embed_dim: int = 128
    embed_source: str = "z"
    # evaluation
    folds: int = 10
    repeats: int = 5
    # execution
    workers: int = 1


_FIELD_TYPES = typing.get_type_hints(RunConfig)


def _coerce(key: str, raw: str):
    target = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if target is bool:
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if target is int:
            return int(raw)
        if target is float:
            return float(raw)
        if target is tuple:
            return tuple(int(x) for x in raw.split(",") if x.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None


def set_option(cfg: RunConfig, key: str, raw: str) -> None:
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown configuration key {key!r}")
    setattr(cfg, key, _coerce(key, raw))


def load_config(path: str | None) -> RunConfig:
    """Read a config file; a missing path yields pure defaults."""
    cfg = RunConfig()
    if path is None:
        return cfg
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in body.split("=", 1))
            try:
                set_option(cfg, key, value)
            except ConfigError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return cfg


def validate(cfg: RunConfig, need_data: bool = True) -> None:
    """Check ranges and referenced files; raises ConfigError."""
    if need_data:
        citation = bool(cfg.content_path or cfg.cites_path)
        generic = bool(cfg.edges_path or cfg.features_path)
        if citation == generic:
            raise ConfigError(
                "set exactly one dataset source: content_path+cites_path "
                "or edges_path+features_path")
        paths = ((cfg.content_path, cfg.cites_path) if citation
                 else (cfg.edges_path, cfg.features_path))
        for p in paths:
            if not p:
                raise ConfigError("both files of the dataset source are required")
            if not os.path.exists(p):
                raise ConfigError(f"dataset file not found: {p}")
    if not 0.0 < cfg.link_fraction <= 1.0:
        raise ConfigError("link_fraction must be in (0, 1]")
    if cfg.aug1 not in KINDS or cfg.aug2 not in KINDS:
        raise ConfigError(f"aug1/aug2 must be one of {KINDS}")
    if not 0.0 <= cfg.aug_p <= 1.0:
        raise ConfigError("aug_p must be in [0, 1]")
    if cfg.loss_mode not in LOSS_MODES:
        raise ConfigError(f"loss_mode must be one of {LOSS_MODES}")
    if cfg.optimizer not in ("adam", "sgd"):
        raise ConfigError("optimizer must be 'adam' or 'sgd'")
    if cfg.embed_source not in ("z", "h"):
        raise ConfigError("embed_source must be 'z' or 'h'")
    if cfg.batch_size < 2:
        raise ConfigError("batch_size must be >= 2")
    if cfg.temperature <= 0:
        raise ConfigError("temperature must be positive")
    if cfg.folds < 2 or cfg.repeats < 1:
        raise ConfigError("folds must be >= 2 and repeats >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    try:
        sampler_config(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_lines(cfg: RunConfig) -> list[str]:
    """Resolved configuration as ``key = value`` lines for artifact headers."""
    out = []
    for f in dataclasses.fields(RunConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(x) for x in value)
        out.append(f"{f.name} = {value}")
    return out


def sampler_config(cfg: RunConfig) -> SamplerConfig:
    return SamplerConfig(hops=cfg.hops, k_per_hop=tuple(cfg.k_per_hop))


def augmentor_spec(cfg: RunConfig, kind: str) -> AugmentorSpec:
    return AugmentorSpec(kind, p=cfg.aug_p, k=cfg.knn_k)


def train_config(cfg: RunConfig) -> TrainConfig:
    return TrainConfig(
        batch_size=cfg.batch_size, temperature=cfg.temperature,
        epochs=cfg.epochs, learning_rate=cfg.learning_rate,
        optimizer=cfg.optimizer, adam_beta1=cfg.adam_beta1,
        adam_beta2=cfg.adam_beta2, adam_eps=cfg.adam_eps,
        aug1=augmentor_spec(cfg, cfg.aug1), aug2=augmentor_spec(cfg, cfg.aug2),
        aug_p=cfg.aug_p, knn_k=cfg.knn_k, seed=cfg.seed,
        loss_mode=cfg.loss_mode, refresh_views=cfg.refresh_views,
        resample_augmentors=cfg.resample_augmentors)
