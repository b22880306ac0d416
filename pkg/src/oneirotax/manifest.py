"""Deterministic run manifest and atomic artifact writes.

The manifest lists the config hash, input checksums, and every stage output
with its checksum. It contains nothing wall-clock dependent, so re-running
with identical inputs and seed reproduces it byte for byte; timestamps go to
a sidecar (run_meta.json) instead.
"""

from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone
from pathlib import Path

from oneirotax import __version__


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def atomic_write_bytes(path, blob: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


class Manifest:
    def __init__(self, out_dir, config_hash: str) -> None:
        self.path = Path(out_dir) / "manifest.json"
        self.meta_path = Path(out_dir) / "run_meta.json"
        self.data = {
            "version": __version__,
            "config_hash": config_hash,
            "inputs": {},
            "stages": {},
        }
        if self.path.exists():
            existing = json.loads(self.path.read_text(encoding="utf-8"))
            if existing.get("config_hash") == config_hash:
                self.data = existing

    def record_input(self, path) -> None:
        self.data["inputs"][str(path)] = sha256_file(path)

    def record_stage(self, stage: str, outputs: list[Path]) -> None:
        self.data["stages"][stage] = {
            str(p.name): sha256_file(p) for p in sorted(outputs)
        }
        self.flush(stage)

    def has_stage(self, stage: str) -> bool:
        return stage in self.data["stages"]

    def flush(self, stage: str | None = None) -> None:
        atomic_write_text(self.path, json.dumps(self.data, indent=2, sort_keys=True) + "\n")
        meta = {}
        if self.meta_path.exists():
            meta = json.loads(self.meta_path.read_text(encoding="utf-8"))
        if stage:
            meta[stage] = datetime.now(timezone.utc).isoformat()
        atomic_write_text(self.meta_path, json.dumps(meta, indent=2, sort_keys=True) + "\n")


class OutputLock:
    """One writer per output directory, enforced by an exclusive lock file."""

    def __init__(self, out_dir) -> None:
        self.path = Path(out_dir) / ".lock"

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise RuntimeError(
                f"output directory is locked by another run: {self.path}"
            )
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return self

    def __exit__(self, *exc):
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass
        return False
