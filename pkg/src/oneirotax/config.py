"""Run configuration: one JSON file, reference defaults, strict validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from oneirotax.embedding import ProviderConfig


class ConfigError(Exception):
    """Validation failure; message carries the offending field path."""


@dataclass
class ThemeParams:
    k: int = 20
    reduce_to: int = 10
    restarts: int = 100


@dataclass
class RunConfig:
    corpus: str
    seed: int
    out: str
    provider: ProviderConfig = field(default_factory=lambda: ProviderConfig(kind="stub"))
    clustering: dict = field(default_factory=dict)
    themes: ThemeParams = field(default_factory=ThemeParams)
    adjustments: str | None = None
    boilerplate_top_n: int = 10000
    backbone_delta: float = 3.8
    backbone_method: str = "noise_corrected"
    min_monthly_docs: int = 300
    trend_window: int = 5
    threads: int = 1

    CLUSTERING_DEFAULTS = {
        "reduce_dim": 10,
        "reduce_method": "pca",
        "min_topic_size": 100,
        "min_samples": None,
        "min_df": 10,
        "mmr_diversity": 0.4,
        "auto_merge": True,
        "merge_threshold": 0.85,
    }

    def clustering_params(self):
        from oneirotax.topics import ClusteringParams

        merged = dict(self.CLUSTERING_DEFAULTS)
        merged.update(self.clustering)
        return ClusteringParams(seed=self.seed, **merged)


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}{key}: missing required field")
    return obj[key]


def load_config(path, overrides: dict | None = None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    overrides = overrides or {}
    raw.update({k: v for k, v in overrides.items() if v is not None})

    corpus = str(_require(raw, "corpus", ""))
    if "seed" not in raw:
        raise ConfigError("seed: missing required field (seed is mandatory)")
    seed = raw["seed"]
    if not isinstance(seed, int):
        raise ConfigError("seed: must be an integer")
    out = str(_require(raw, "out", ""))

    prov_raw = raw.get("provider", {})
    if not isinstance(prov_raw, dict):
        raise ConfigError("provider: must be an object")
    try:
        provider = ProviderConfig(
            kind=prov_raw.get("kind", "stub"),
            location=prov_raw.get("location", ""),
            model_name=prov_raw.get("model_name", "stub-hash-v1"),
            expected_dim=int(prov_raw.get("expected_dim", 768)),
        )
    except Exception as exc:
        raise ConfigError(f"provider: {exc}")

    clustering = raw.get("clustering", {})
    if not isinstance(clustering, dict):
        raise ConfigError("clustering: must be an object")
    unknown = set(clustering) - set(RunConfig.CLUSTERING_DEFAULTS)
    if unknown:
        raise ConfigError(f"clustering.{sorted(unknown)[0]}: unknown field")

    themes_raw = raw.get("themes", {})
    if not isinstance(themes_raw, dict):
        raise ConfigError("themes: must be an object")
    theme_params = ThemeParams(
        k=int(themes_raw.get("k", 20)),
        reduce_to=int(themes_raw.get("reduce_to", 10)),
        restarts=int(themes_raw.get("restarts", 100)),
    )

    cfg = RunConfig(
        corpus=corpus,
        seed=seed,
        out=out,
        provider=provider,
        clustering=clustering,
        themes=theme_params,
        adjustments=raw.get("adjustments"),
        boilerplate_top_n=int(raw.get("boilerplate_top_n", 10000)),
        backbone_delta=float(raw.get("backbone_delta", 3.8)),
        backbone_method=str(raw.get("backbone_method", "noise_corrected")),
        min_monthly_docs=int(raw.get("min_monthly_docs", 300)),
        trend_window=int(raw.get("trend_window", 5)),
        threads=int(raw.get("threads", 1)),
    )
    if cfg.backbone_method not in ("noise_corrected", "threshold"):
        raise ConfigError("backbone_method: must be noise_corrected or threshold")
    if not Path(cfg.corpus).exists():
        raise ConfigError(f"corpus: path does not exist: {cfg.corpus}")
    if cfg.adjustments is not None and not Path(cfg.adjustments).exists():
        raise ConfigError(f"adjustments: path does not exist: {cfg.adjustments}")
    if cfg.provider.kind == "file" and not Path(cfg.provider.location).exists():
        raise ConfigError(f"provider.location: path does not exist: {cfg.provider.location}")
    return cfg


def config_fingerprint(cfg: RunConfig) -> str:
    """Stable hash of the effective configuration.

    The output directory is excluded: it determines where results land, not
    what they are, so runs into different directories stay comparable.
    """
    import hashlib
    from dataclasses import asdict

    payload = asdict(cfg)
    payload.pop("out", None)
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()
