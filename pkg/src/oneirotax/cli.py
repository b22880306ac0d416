"""Command-line interface.

Exit codes: 0 success, 1 validation failure (message names the offending
field or input), 2 missing stage dependency (message names the stage to run).
"""

from __future__ import annotations

import logging
import sys

import click

from oneirotax import pipeline
from oneirotax.config import ConfigError, RunConfig, config_fingerprint, load_config
from oneirotax.corpus import CorpusError
from oneirotax.embedding import ProviderError
from oneirotax.manifest import Manifest, OutputLock
from oneirotax.themes import ThemeError

log = logging.getLogger("oneirotax")

_COMMON = [
    click.option("--config", "config_path", required=True, type=click.Path(),
                 help="Path to the run configuration (JSON)."),
    click.option("--seed", type=int, default=None, help="Override the config seed."),
    click.option("--out", type=click.Path(), default=None, help="Override the output directory."),
    click.option("--provider", "provider_kind", default=None,
                 type=click.Choice(["stub", "file", "http"]),
                 help="Override the embedding provider kind."),
    click.option("--threads", type=int, default=None, help="Override worker thread count."),
]


def _with_common(fn):
    for opt in reversed(_COMMON):
        fn = opt(fn)
    return fn


def _load(config_path, seed, out, provider_kind, threads) -> RunConfig:
    overrides: dict = {}
    if seed is not None:
        overrides["seed"] = seed
    if out is not None:
        overrides["out"] = out
    if threads is not None:
        overrides["threads"] = threads
    cfg = load_config(config_path, overrides)
    if provider_kind is not None and provider_kind != cfg.provider.kind:
        from dataclasses import replace

        cfg.provider = replace(cfg.provider, kind=provider_kind)
        if cfg.provider.kind == "file":
            from pathlib import Path

            if not Path(cfg.provider.location).exists():
                raise ConfigError(
                    f"provider.location: path does not exist: {cfg.provider.location}"
                )
    return cfg


def _run_stage(stage: str, cfg: RunConfig) -> None:
    manifest = Manifest(cfg.out, config_fingerprint(cfg))
    with OutputLock(cfg.out):
        pipeline.STAGES[stage](cfg, manifest)


def _dispatch(stage: str, **kwargs) -> None:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(**kwargs)
        _run_stage(stage, cfg)
    except pipeline.MissingDependency as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except (ConfigError, CorpusError, ProviderError, ThemeError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    sys.exit(0)


@click.group()
def main() -> None:
    """Topic discovery and trend analysis for short free-text report corpora."""


def _register(stage: str, help_text: str) -> None:
    @main.command(name=stage, help=help_text)
    @_with_common
    def _cmd(**kwargs):
        _dispatch(stage, **kwargs)

    _cmd.__name__ = stage.replace("-", "_")


_register("ingest", "Load, segment, filter, and label the corpus.")
_register("embed", "Embed the retained sentences into an EMB1 dump.")
_register("topics", "Cluster sentence embeddings into ranked topics.")
_register("themes", "Group topics into themes and apply adjustments.")
_register("taxonomy", "Frequency tables and backboned co-occurrence network.")
_register("odds", "Odds-ratio profiles per dream type.")
_register("trends", "Monthly importance trend series per entity.")
_register("review-packet", "Per-theme human review packets.")
_register("report", "Summarize a completed run.")


if __name__ == "__main__":
    main()
