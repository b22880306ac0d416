"""Deterministic default encoder.

Stands in for a neural sentence encoder: a text maps to the normalized sum
of per-token hash vectors plus a small whole-text component, seeded from
SHA-256, so identical (model, text) pairs always yield identical vectors
across processes and restarts. Real deployments swap in a neural model
behind the same interface (deterministic inference mode required).
"""

from __future__ import annotations

import hashlib

import numpy as np

DEFAULT_DIM = 768
DEFAULT_MODEL = "hash-bow-v1"


def _hash_vector(material: bytes, dim: int) -> np.ndarray:
    digest = hashlib.sha256(material).digest()
    rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "little")))
    return rng.standard_normal(dim)


class HashEncoder:
    def __init__(self, model_name: str = DEFAULT_MODEL, dim: int = DEFAULT_DIM):
        if dim <= 0:
            raise ValueError("dim must be > 0")
        self.model_name = model_name
        self.dim = dim

    def encode_one(self, text: str) -> np.ndarray:
        tokens = "".join(
            c.lower() if c.isalnum() else " " for c in text
        ).split()
        vec = 0.25 * _hash_vector(f"{self.model_name}\x00{text}".encode(), self.dim)
        for tok in tokens:
            vec += _hash_vector(f"{self.model_name}\x01{tok}".encode(), self.dim)
        norm = float(np.linalg.norm(vec))
        return (vec / norm).astype(np.float32)

    def encode(self, texts: list[str]) -> np.ndarray:
        return np.stack([self.encode_one(t) for t in texts])
