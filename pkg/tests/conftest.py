import json
import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance-criteria result lines after the run, one per
    criterion, so they are visible even with output capture enabled."""
    mod = sys.modules.get("test_acceptance") or sys.modules.get(
        "tests.test_acceptance")
    passed = list(getattr(mod, "RESULT_LINES", ()) if mod else ())
    failed = [
        f"FAIL [PRIMARY] {rep.nodeid.split('::', 1)[1]}"
        for rep in terminalreporter.stats.get("failed", ())
        if "test_acceptance.py" in rep.nodeid
    ]
    if passed or failed:
        terminalreporter.section("acceptance criteria")
        for line in passed + failed:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def corpus_500() -> Path:
    return DATA / "synthetic_500.jsonl"


@pytest.fixture(scope="session")
def corpus_50() -> Path:
    return DATA / "synthetic_50.jsonl"


@pytest.fixture(scope="session")
def golden_50() -> dict:
    return json.loads((DATA / "synthetic_50_golden.json").read_text())


def base_config(corpus: Path, out: Path, **extra) -> dict:
    cfg = {
        "corpus": str(corpus),
        "seed": 42,
        "out": str(out),
        "provider": {"kind": "stub", "expected_dim": 64},
        "clustering": {"min_topic_size": 15, "min_df": 3},
        "themes": {"k": 5, "restarts": 10},
        "boilerplate_top_n": 0,
        "min_monthly_docs": 10,
    }
    cfg.update(extra)
    return cfg


def write_config(path: Path, cfg: dict) -> Path:
    path.write_text(json.dumps(cfg, indent=2))
    return path


def run_stages(cfg_path: Path, stages=None) -> None:
    """Drive pipeline stages the way the CLI does, in-process."""
    from oneirotax.config import config_fingerprint, load_config
    from oneirotax.manifest import Manifest, OutputLock
    from oneirotax.pipeline import STAGES

    cfg = load_config(cfg_path)
    all_stages = ["ingest", "embed", "topics", "themes", "taxonomy",
                  "odds", "trends", "review-packet", "report"]
    for stage in stages or all_stages:
        manifest = Manifest(cfg.out, config_fingerprint(cfg))
        with OutputLock(cfg.out):
            STAGES[stage](cfg, manifest)


@pytest.fixture(scope="session")
def full_run(tmp_path_factory, corpus_500):
    """One complete pipeline run over the 500-document corpus."""
    out = tmp_path_factory.mktemp("full_run_out")
    cfg_path = tmp_path_factory.mktemp("full_run_cfg") / "config.json"
    write_config(cfg_path, base_config(corpus_500, out))
    run_stages(cfg_path)
    return out, cfg_path
