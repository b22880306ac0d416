"""Maximal marginal relevance selection of topic terms."""

from __future__ import annotations

import logging

import numpy as np

from oneirotax.embedding import cosine

log = logging.getLogger(__name__)


def mmr_diversify(
    candidates: list[tuple[str, float]],
    term_embeddings: dict[str, np.ndarray],
    topic_centroid: np.ndarray,
    diversity: float = 0.4,
    k: int = 10,
) -> list[str]:
    """Greedy MMR pick of k terms from ranked (term, ctfidf-score) candidates.

    First pick is the most centroid-similar term; each next pick maximizes
    (1 - diversity) * cos(term, centroid) - diversity * max cos(term, picked).
    Ties break by higher c-TF-IDF score, then lexicographic.
    """
    if not 0.0 <= diversity <= 1.0:
        raise ValueError("diversity must be in [0, 1]")
    if len(candidates) < k:
        log.warning("only %d candidates for k=%d; returning all", len(candidates), k)
    score = {term: s for term, s in candidates}
    terms = [term for term, _ in candidates]
    rel = {t: cosine(term_embeddings[t], topic_centroid) for t in terms}

    selected: list[str] = []
    remaining = list(terms)
    while remaining and len(selected) < k:
        if not selected:
            objective = {t: rel[t] for t in remaining}
        else:
            objective = {
                t: (1.0 - diversity) * rel[t]
                - diversity * max(cosine(term_embeddings[t], term_embeddings[s]) for s in selected)
                for t in remaining
            }
        best = max(remaining, key=lambda t: (objective[t], score[t], _lex_key(t)))
        selected.append(best)
        remaining.remove(best)
    return selected


def _lex_key(term: str):
    # max() favors larger keys; invert each char so lexicographically
    # smaller terms win ties
    return tuple(-ord(c) for c in term) + (1,)
