"""Sentence and word embeddings with interchangeable providers and caching."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from oneirotax.embedding.cache import CacheCorruption, VectorCache
from oneirotax.embedding.emb1 import read_emb1, text_key, write_emb1
from oneirotax.embedding.providers import (
    FileProvider,
    HttpProvider,
    ProviderConfig,
    ProviderError,
    StubProvider,
    make_provider,
)

log = logging.getLogger(__name__)

__all__ = [
    "EmbeddingMatrix", "embed_texts", "cosine",
    "ProviderConfig", "ProviderError", "make_provider",
    "StubProvider", "FileProvider", "HttpProvider",
    "VectorCache", "CacheCorruption",
    "read_emb1", "write_emb1", "text_key",
]


@dataclass
class EmbeddingMatrix:
    values: np.ndarray          # (n_rows, dim) float32
    row_keys: list[bytes]       # 32-byte content hashes aligned to rows

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        if len(self.row_keys) != self.values.shape[0]:
            raise ValueError("row_keys misaligned with values")
        if not np.isfinite(self.values).all():
            raise ValueError("embedding matrix contains NaN/Inf")


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1]; zero vectors are an error."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for zero vectors")
    return float(np.clip(float(u @ v) / (nu * nv), -1.0, 1.0))


def embed_texts(
    provider,
    texts: list[str],
    cache: VectorCache | None = None,
    threads: int = 1,
) -> EmbeddingMatrix:
    """Embed texts through a provider with optional content-addressed caching.

    Duplicate texts are fetched once; repeated calls are bit-identical. Rows
    come back aligned with the input order.
    """
    if not texts:
        raise ValueError("texts must be non-empty")
    keys = [text_key(t) for t in texts]
    unique: dict[bytes, str] = {}
    for key, t in zip(keys, texts):
        unique.setdefault(key, t)

    rows: dict[bytes, np.ndarray] = {}
    missing: list[bytes] = []
    for key in unique:
        vec = cache.get(provider.model_name, key) if cache is not None else None
        if vec is not None:
            rows[key] = vec
        else:
            missing.append(key)

    if missing:
        batch_texts = [unique[k] for k in missing]
        if threads > 1 and len(batch_texts) > 1:
            chunk = max(1, (len(batch_texts) + threads - 1) // threads)
            parts = [batch_texts[i:i + chunk] for i in range(0, len(batch_texts), chunk)]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                fetched = np.concatenate(list(pool.map(provider.embed_batch, parts)))
        else:
            fetched = provider.embed_batch(batch_texts)
        fetched = np.asarray(fetched, dtype=np.float32)
        if not np.isfinite(fetched).all():
            raise ProviderError("provider returned NaN/Inf values")
        expected = getattr(provider, "dim", None)
        if expected is not None and fetched.shape[1] != expected:
            raise ProviderError(
                f"dim mismatch: observed {fetched.shape[1]}, expected {expected}"
            )
        for key, vec in zip(missing, fetched):
            rows[key] = vec
            if cache is not None:
                with cache.key_lock(provider.model_name, key):
                    cache.put(provider.model_name, key, vec)

    values = np.stack([rows[k] for k in keys])
    return EmbeddingMatrix(values=values, row_keys=keys)
