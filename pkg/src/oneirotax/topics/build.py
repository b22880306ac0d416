"""From sentence embeddings to ranked topics with 10-term representations."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from oneirotax.corpus import Sentence
from oneirotax.embedding import EmbeddingMatrix, embed_texts
from oneirotax.topics.ctfidf import ctfidf_scores
from oneirotax.topics.density import density_cluster
from oneirotax.topics.mmr import mmr_diversify
from oneirotax.topics.reduce import reduce as reduce_matrix

log = logging.getLogger(__name__)

BANNED_UNIGRAMS = frozenset({"dream", "dreams"})
CANDIDATE_POOL = 30
N_TERMS = 10
N_REPRESENTATIVE = 3


@dataclass
class ClusteringParams:
    seed: int
    reduce_dim: int = 10
    reduce_method: str = "pca"
    min_topic_size: int = 100
    min_samples: int | None = None
    min_df: int = 10
    mmr_diversity: float = 0.4
    auto_merge: bool = True
    merge_threshold: float = 0.85

    def __post_init__(self):
        if self.min_topic_size < 2:
            raise ValueError("min_topic_size must be >= 2")
        if not 0.0 <= self.mmr_diversity <= 1.0:
            raise ValueError("mmr_diversity must be in [0, 1]")


@dataclass
class Topic:
    topic_id: int                      # rank: 0 = most sentences
    words: list[tuple[str, float]]     # up to 10 (term, weight), weights sum to 1
    n_sentences: int
    representative_sentence_ids: list[str]
    orig_cluster: int = -1
    empty: bool = field(default=False)


@dataclass
class TopicModel:
    topics: list[Topic]
    assignments: dict[str, int]        # sentence_id -> topic_id (-1 = outlier)


def merge_similar_topics(
    labels: np.ndarray, scores: dict[int, list[tuple[str, float]]], threshold: float
) -> np.ndarray:
    """Union topics whose c-TF-IDF representations have cosine >= threshold."""
    topic_ids = sorted(scores)
    vecs = {c: dict(scores[c]) for c in topic_ids}

    def rep_cosine(a: int, b: int) -> float:
        va, vb = vecs[a], vecs[b]
        if not va or not vb:
            return 0.0
        dot = sum(w * vb[g] for g, w in va.items() if g in vb)
        na = np.sqrt(sum(w * w for w in va.values()))
        nb = np.sqrt(sum(w * w for w in vb.values()))
        return dot / (na * nb) if na and nb else 0.0

    parent = {c: c for c in topic_ids}

    def find(c: int) -> int:
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    merged = 0
    for i, a in enumerate(topic_ids):
        for b in topic_ids[i + 1:]:
            if rep_cosine(a, b) >= threshold:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
                    merged += 1
    if merged:
        log.info("auto-merged %d topic pairs", merged)
    remap = {c: find(c) for c in topic_ids}
    new_labels = labels.copy()
    for idx, lab in enumerate(labels):
        if lab >= 0:
            new_labels[idx] = remap[int(lab)]
    return new_labels


def strip_and_renormalize(
    selected: list[str],
    candidates: list[tuple[str, float]],
    banned: frozenset[str] = BANNED_UNIGRAMS,
    k: int = N_TERMS,
) -> list[tuple[str, float]]:
    """Drop banned unigrams (bigrams containing a banned token are kept),
    refill from next-ranked candidates, and renormalize weights to sum 1."""
    score = dict(candidates)
    kept = [t for t in selected if "-" in t or t not in banned]
    if len(kept) < k:
        for term, _ in candidates:
            if len(kept) >= k:
                break
            if term in kept or ("-" not in term and term in banned):
                continue
            kept.append(term)
    kept = kept[:k]
    total = sum(score[t] for t in kept)
    if not kept or total <= 0:
        return []
    words = [(t, score[t] / total) for t in kept]
    words.sort(key=lambda kv: (-kv[1], kv[0]))
    return words


def rank_clusters(labels: np.ndarray) -> dict[int, int]:
    """Map raw cluster labels to topic ids by size desc, tie on lower label."""
    sizes: dict[int, int] = {}
    for lab in labels:
        if lab >= 0:
            sizes[int(lab)] = sizes.get(int(lab), 0) + 1
    ordered = sorted(sizes, key=lambda c: (-sizes[c], c))
    return {c: rank for rank, c in enumerate(ordered)}


def doc_topics(sentence_topic_ids: list[int]) -> list[int]:
    """Unique non-outlier topics of a document, by first occurrence."""
    seen: list[int] = []
    for t in sentence_topic_ids:
        if t >= 0 and t not in seen:
            seen.append(t)
    return seen


def build_topics(
    sentences: list[Sentence],
    embeddings: EmbeddingMatrix,
    provider,
    params: ClusteringParams,
    cache=None,
) -> TopicModel:
    if len(sentences) != embeddings.n_rows:
        raise ValueError("embeddings misaligned with sentences")
    texts = [s.text for s in sentences]

    reduced = reduce_matrix(
        embeddings.values, params.reduce_dim,
        method=params.reduce_method, seed=params.seed,
    )
    clustering = density_cluster(
        reduced, params.min_topic_size, min_samples=params.min_samples
    )
    labels = clustering.labels

    scores = ctfidf_scores(texts, labels.tolist(), min_df=params.min_df)
    if params.auto_merge and len(scores) > 1:
        merged = merge_similar_topics(labels, scores, params.merge_threshold)
        if not np.array_equal(merged, labels):
            labels = merged
            scores = ctfidf_scores(texts, labels.tolist(), min_df=params.min_df)

    rank = rank_clusters(labels)
    full = embeddings.values.astype(np.float64)

    # embed candidate terms once across topics (bigrams as two words)
    all_terms = sorted({
        term for c in scores for term, _ in scores[c][:CANDIDATE_POOL]
    })
    term_vectors: dict[str, np.ndarray] = {}
    if all_terms:
        mat = embed_texts(
            provider, [t.replace("-", " ") for t in all_terms], cache=cache
        )
        term_vectors = {t: mat.values[i].astype(np.float64) for i, t in enumerate(all_terms)}

    topics: list[Topic] = []
    for cluster, topic_id in sorted(rank.items(), key=lambda kv: kv[1]):
        member_idx = np.flatnonzero(labels == cluster)
        centroid = full[member_idx].mean(axis=0)
        candidates = scores.get(cluster, [])[:CANDIDATE_POOL]
        if candidates:
            selected = mmr_diversify(
                candidates, term_vectors, centroid,
                diversity=params.mmr_diversity, k=N_TERMS,
            )
            words = strip_and_renormalize(selected, candidates)
        else:
            words = []
        if not words:
            log.warning("topic %d has an empty term list", topic_id)
        # representatives: member sentences closest to the centroid
        member_vecs = full[member_idx]
        sims = member_vecs @ centroid / (
            np.linalg.norm(member_vecs, axis=1) * np.linalg.norm(centroid) + 1e-30
        )
        order = sorted(range(len(member_idx)), key=lambda i: (-sims[i], sentences[member_idx[i]].sentence_id))
        reps = [sentences[member_idx[i]].sentence_id for i in order[:N_REPRESENTATIVE]]
        topics.append(Topic(
            topic_id=topic_id,
            words=words,
            n_sentences=len(member_idx),
            representative_sentence_ids=reps,
            orig_cluster=int(cluster),
            empty=not words,
        ))

    assignments = {
        s.sentence_id: (rank[int(lab)] if lab >= 0 else -1)
        for s, lab in zip(sentences, labels)
    }
    return TopicModel(topics=topics, assignments=assignments)
