"""Dimensionality reduction: PCA (default) and Gaussian random projection."""

from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)


def pca_reduce(matrix: np.ndarray, target_dim: int) -> np.ndarray:
    """Center and project onto the top principal components.

    Deterministic: component signs are fixed so that each component's
    largest-magnitude coordinate is positive. Rank-deficient input falls
    back to the attainable number of components with a warning (remaining
    output dimensions are zero).
    """
    X = np.asarray(matrix, dtype=np.float64)
    n, d = X.shape
    if target_dim >= d:
        raise ValueError(f"target_dim {target_dim} must be < dim {d}")
    if n < target_dim:
        raise ValueError(f"pca needs n_rows >= target_dim ({n} < {target_dim})")
    Xc = X - X.mean(axis=0)
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    rank = int((s > s[0] * 1e-12).sum()) if s.size and s[0] > 0 else 0
    k = min(target_dim, rank)
    if k < target_dim:
        log.warning("pca input rank %d < target_dim %d; extra dims are zero", rank, target_dim)
    components = vt[:k]
    # sign convention: largest-|coordinate| of each component is positive
    flip = np.sign(components[np.arange(k), np.argmax(np.abs(components), axis=1)])
    components = components * flip[:, None]
    out = np.zeros((n, target_dim))
    out[:, :k] = Xc @ components.T
    return out


def random_projection(matrix: np.ndarray, target_dim: int, seed: int) -> np.ndarray:
    """Seeded Gaussian random projection scaled by 1/sqrt(target_dim)."""
    X = np.asarray(matrix, dtype=np.float64)
    d = X.shape[1]
    if target_dim >= d:
        raise ValueError(f"target_dim {target_dim} must be < dim {d}")
    rng = np.random.Generator(np.random.PCG64(seed))
    proj = rng.standard_normal((d, target_dim)) / np.sqrt(target_dim)
    return X @ proj


def reduce(matrix, target_dim: int, method: str = "pca", seed: int = 0) -> np.ndarray:
    if method == "pca":
        return pca_reduce(matrix, target_dim)
    if method == "random_projection":
        return random_projection(matrix, target_dim, seed)
    raise ValueError(f"unknown reduction method {method!r}")
