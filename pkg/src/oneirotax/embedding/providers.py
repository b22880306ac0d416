"""Embedding providers: deterministic stub, EMB1 file reader, HTTP client.

All providers expose embed_batch(texts) -> float32 (len(texts), dim) and the
attributes model_name / dim. The stub keeps the pipeline fully deterministic
without any neural runtime; the http provider talks to the embed service's
POST /embed endpoint; the file provider serves vectors from an EMB1 dump.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass

import numpy as np

from oneirotax.embedding.emb1 import read_emb1, text_key

log = logging.getLogger(__name__)

HTTP_BATCH_LIMIT = 256


class ProviderError(Exception):
    pass


@dataclass(frozen=True)
class ProviderConfig:
    kind: str  # stub | file | http
    location: str = ""
    model_name: str = "stub-hash-v1"
    expected_dim: int = 768

    def __post_init__(self):
        if self.kind not in ("stub", "file", "http"):
            raise ProviderError(f"unknown provider kind {self.kind!r}")
        if self.expected_dim <= 0:
            raise ProviderError("expected_dim must be > 0")


def _hash_vector(seed_material: bytes, dim: int) -> np.ndarray:
    digest = hashlib.sha256(seed_material).digest()
    rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "little")))
    return rng.standard_normal(dim)


class StubProvider:
    """Seeded hash-to-vector encoder.

    A text maps to the normalized sum of per-token hash vectors plus a small
    whole-text component, so texts sharing vocabulary land near each other.
    Deterministic per (model_name, text).
    """

    def __init__(self, model_name: str = "stub-hash-v1", dim: int = 768) -> None:
        self.model_name = model_name
        self.dim = dim

    def _embed_one(self, text: str) -> np.ndarray:
        tokens = [t for t in "".join(
            c.lower() if c.isalnum() else " " for c in text
        ).split()]
        vec = 0.25 * _hash_vector(f"{self.model_name}\x00{text}".encode(), self.dim)
        for tok in tokens:
            vec += _hash_vector(f"{self.model_name}\x01{tok}".encode(), self.dim)
        norm = float(np.linalg.norm(vec))
        return (vec / norm).astype(np.float32)

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        return np.stack([self._embed_one(t) for t in texts])


class FileProvider:
    """Serves vectors from an EMB1 dump; any missing key is fatal."""

    def __init__(self, path, model_name: str = "file", expected_dim: int | None = None) -> None:
        keys, vectors = read_emb1(path)
        if expected_dim is not None and vectors.shape[1] != expected_dim:
            raise ProviderError(
                f"dim mismatch: file has {vectors.shape[1]}, expected {expected_dim}"
            )
        self.model_name = model_name
        self.dim = int(vectors.shape[1])
        self._rows = {k: vectors[i] for i, k in enumerate(keys)}

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        keys = [text_key(t) for t in texts]
        missing = [k.hex() for k in keys if k not in self._rows]
        if missing:
            raise ProviderError(
                "file provider is missing keys: " + ", ".join(sorted(missing))
            )
        return np.stack([self._rows[k] for k in keys])


class HttpProvider:
    """Client for the embed service (POST /embed)."""

    def __init__(
        self,
        url: str,
        model_name: str = "",
        expected_dim: int | None = None,
        retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 60.0,
    ) -> None:
        import requests

        self._requests = requests
        self.url = url.rstrip("/")
        self.model_name = model_name
        self.dim = expected_dim
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout

    def _post(self, texts: list[str]) -> np.ndarray:
        last_exc: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = self._requests.post(
                    f"{self.url}/embed", json={"texts": texts}, timeout=self.timeout
                )
                resp.raise_for_status()
                payload = resp.json()
                break
            except Exception as exc:  # connection errors and HTTP failures
                last_exc = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * 2**attempt)
        else:
            raise ProviderError(f"embed service unreachable at {self.url}: {last_exc}")
        vectors = np.asarray(payload["vectors"], dtype=np.float32)
        if not self.model_name:
            self.model_name = payload.get("model", "http")
        if self.dim is None:
            self.dim = int(payload["dim"])
        if vectors.shape != (len(texts), self.dim):
            raise ProviderError(
                f"dim mismatch: service returned {vectors.shape}, expected ({len(texts)}, {self.dim})"
            )
        return vectors

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        out: list[np.ndarray] = []
        for start in range(0, len(texts), HTTP_BATCH_LIMIT):
            out.append(self._post(texts[start:start + HTTP_BATCH_LIMIT]))
        return np.concatenate(out) if len(out) > 1 else out[0]


def make_provider(config: ProviderConfig):
    if config.kind == "stub":
        return StubProvider(model_name=config.model_name, dim=config.expected_dim)
    if config.kind == "file":
        return FileProvider(
            config.location, model_name=config.model_name, expected_dim=config.expected_dim
        )
    return HttpProvider(
        config.location, model_name=config.model_name, expected_dim=config.expected_dim
    )
