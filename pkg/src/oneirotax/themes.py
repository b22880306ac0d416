"""Topic embeddings, theme clustering, and the declarative adjustment layer."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from oneirotax import kernels
from oneirotax.embedding import embed_texts
from oneirotax.topics import Topic
from oneirotax.topics.reduce import pca_reduce

log = logging.getLogger(__name__)

CATEGORIES = ("dream_content", "dream_type", "interface", "waking", "social_artifact")


class ThemeError(Exception):
    pass


@dataclass
class TopicEmbedding:
    topic_id: int
    vector: np.ndarray


@dataclass
class Theme:
    theme_id: int
    name: str
    topic_ids: set[int]
    category: str = "dream_content"


def topic_embedding(topic: Topic, provider, cache=None) -> TopicEmbedding:
    """Weighted sum of the topic's term embeddings (weights sum to 1)."""
    if not topic.words:
        raise ThemeError(f"topic {topic.topic_id} has no terms")
    total = sum(w for _, w in topic.words)
    if abs(total - 1.0) > 1e-6:
        raise ThemeError(f"topic {topic.topic_id} weights sum to {total}, not 1")
    mat = embed_texts(
        provider, [term.replace("-", " ") for term, _ in topic.words], cache=cache
    )
    weights = np.array([w for _, w in topic.words], dtype=np.float64)
    vector = weights @ mat.values.astype(np.float64)
    return TopicEmbedding(topic_id=topic.topic_id, vector=vector)


def standardize(X: np.ndarray) -> np.ndarray:
    """Per-dimension zero mean, unit variance; constant dimensions map to 0."""
    X = np.asarray(X, dtype=np.float64)
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    out = np.zeros_like(X)
    nz = sigma > 0
    out[:, nz] = (X[:, nz] - mu[nz]) / sigma[nz]
    return out


# --- k-means with k-means++ seeding and restarts ---------------------------

def _kmeanspp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.einsum("ij,ij->i", X - centers[0], X - centers[0])
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[i] = X[rng.integers(n)]
        else:
            centers[i] = X[rng.choice(n, p=d2 / total)]
        diff = X - centers[i]
        d2 = np.minimum(d2, np.einsum("ij,ij->i", diff, diff))
    return centers


def _lloyd(
    X: np.ndarray, centers: np.ndarray, rng: np.random.Generator,
    max_iter: int = 300, tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray, float]:
    prev_inertia = np.inf
    labels = np.zeros(X.shape[0], dtype=np.int64)
    for _ in range(max_iter):
        labels, inertia = kernels.kmeans_assign(X, centers)
        # the k-means objective may never increase across iterations
        assert inertia <= prev_inertia + 1e-9 * max(1.0, abs(prev_inertia)), (
            f"k-means objective increased: {prev_inertia} -> {inertia}"
        )
        prev_inertia = inertia
        new_centers = centers.copy()
        for c in range(centers.shape[0]):
            members = X[labels == c]
            if len(members):
                new_centers[c] = members.mean(axis=0)
            else:
                # re-seed an empty cluster from the farthest point
                diff = X - centers[labels]
                far = int(np.argmax(np.einsum("ij,ij->i", diff, diff)))
                new_centers[c] = X[far]
        shift = float(np.linalg.norm(new_centers - centers))
        centers = new_centers
        if shift < tol:
            break
    labels, inertia = kernels.kmeans_assign(X, centers)
    return labels, centers, inertia


def kmeans(
    X: np.ndarray, k: int, seed: int, restarts: int = 100,
    max_iter: int = 300, tol: float = 1e-6,
) -> tuple[np.ndarray, float]:
    """Seeded k-means++ with restarts; returns the lowest-inertia labeling."""
    X = np.asarray(X, dtype=np.float64)
    if k > X.shape[0]:
        raise ThemeError(f"k={k} exceeds number of points {X.shape[0]}")
    best_labels, best_inertia = None, np.inf
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    for ss in seeds:
        rng = np.random.Generator(np.random.PCG64(ss))
        centers = _kmeanspp_init(X, k, rng)
        labels, _, inertia = _lloyd(X, centers, rng, max_iter=max_iter, tol=tol)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels, best_inertia


def cluster_topics(
    embeddings: list[TopicEmbedding],
    topics: list[Topic],
    k: int = 20,
    reduce_to: int = 10,
    seed: int = 0,
    restarts: int = 100,
) -> list[Theme]:
    """Standardize, reduce, and k-means the topic embeddings into themes."""
    if len(embeddings) < k:
        raise ThemeError(f"need at least k={k} topics, got {len(embeddings)}")
    by_id = {t.topic_id: t for t in topics}
    X = standardize(np.stack([e.vector for e in embeddings]))
    if reduce_to < X.shape[1] and X.shape[0] >= reduce_to:
        X = pca_reduce(X, reduce_to)
    labels, _ = kmeans(X, k, seed=seed, restarts=restarts)
    themes: list[Theme] = []
    for c in range(k):
        topic_ids = {embeddings[i].topic_id for i in np.flatnonzero(labels == c)}
        if not topic_ids:
            continue
        top3 = sorted(topic_ids, key=lambda t: -by_id[t].n_sentences)[:3]
        name = "; ".join(
            by_id[t].words[0][0] for t in top3 if by_id[t].words
        ) or f"theme-{c}"
        themes.append(Theme(theme_id=c, name=name, topic_ids=topic_ids))
    return themes


# --- Adjustments ------------------------------------------------------------

@dataclass
class AdjustmentScript:
    actions: list[dict]
    consumed: bool = field(default=False)

    @classmethod
    def load(cls, path) -> "AdjustmentScript":
        actions = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    actions.append(json.loads(line))
        return cls(actions=actions)


def apply_adjustments(
    themes: list[Theme], script: AdjustmentScript
) -> tuple[list[Theme], list[int], list[str]]:
    """Apply the ordered action list once; returns (themes, dropped, audit log).

    Every reference must exist at its step; a dangling reference is fatal and
    names the action index.
    """
    if script.consumed:
        raise ThemeError("adjustment script was already applied in this run")
    script.consumed = True
    themes = [Theme(t.theme_id, t.name, set(t.topic_ids), t.category) for t in themes]
    by_id = {t.theme_id: t for t in themes}
    next_id = max(by_id, default=-1) + 1
    dropped: list[int] = []
    audit: list[str] = []

    def theme_of(idx: int, tid) -> Theme:
        if tid not in by_id:
            raise ThemeError(f"action {idx}: theme {tid} does not exist")
        return by_id[tid]

    for idx, action in enumerate(script.actions):
        kind = action.get("action")
        if kind == "rename":
            t = theme_of(idx, action["theme"])
            audit.append(f"{idx}: rename theme {t.theme_id} {t.name!r} -> {action['name']!r}")
            t.name = action["name"]
        elif kind == "set_category":
            if action["category"] not in CATEGORIES:
                raise ThemeError(f"action {idx}: unknown category {action['category']!r}")
            t = theme_of(idx, action["theme"])
            audit.append(f"{idx}: set_category theme {t.theme_id} -> {action['category']}")
            t.category = action["category"]
        elif kind == "move_topic":
            src = theme_of(idx, action["from"])
            dst = theme_of(idx, action["to"])
            topic = action["topic"]
            if topic not in src.topic_ids:
                raise ThemeError(f"action {idx}: topic {topic} not in theme {src.theme_id}")
            src.topic_ids.discard(topic)
            dst.topic_ids.add(topic)
            audit.append(f"{idx}: move_topic {topic} {src.theme_id} -> {dst.theme_id}")
        elif kind == "split":
            t = theme_of(idx, action["theme"])
            partition = [set(p) for p in action["partition"]]
            names = action["names"]
            if len(partition) != len(names):
                raise ThemeError(f"action {idx}: partition/names length mismatch")
            union = set().union(*partition) if partition else set()
            if union != t.topic_ids or sum(map(len, partition)) != len(union):
                raise ThemeError(
                    f"action {idx}: partition does not cover theme {t.theme_id} exactly"
                )
            themes.remove(t)
            del by_id[t.theme_id]
            for part, name in zip(partition, names):
                nt = Theme(next_id, name, part, t.category)
                themes.append(nt)
                by_id[next_id] = nt
                next_id += 1
            audit.append(f"{idx}: split theme {t.theme_id} into {len(partition)} themes")
        elif kind == "drop_topic":
            topic = action["topic"]
            holder = next((t for t in themes if topic in t.topic_ids), None)
            if holder is None:
                raise ThemeError(f"action {idx}: topic {topic} not in any theme")
            holder.topic_ids.discard(topic)
            if not holder.topic_ids:
                themes.remove(holder)
                del by_id[holder.theme_id]
            dropped.append(topic)
            audit.append(f"{idx}: drop_topic {topic} from theme {holder.theme_id}")
        else:
            raise ThemeError(f"action {idx}: unknown action {kind!r}")
    return themes, dropped, audit


def filter_dream_content(themes: list[Theme]) -> list[Theme]:
    """Keep only dream_content themes; every theme must be categorized."""
    for t in themes:
        if t.category not in CATEGORIES:
            raise ThemeError(f"theme {t.theme_id} has invalid category {t.category!r}")
    kept = [t for t in themes if t.category == "dream_content"]
    excluded = [t for t in themes if t.category != "dream_content"]
    for t in excluded:
        log.info(
            "excluding theme %d (%s, %s) with %d topics",
            t.theme_id, t.name, t.category, len(t.topic_ids),
        )
    return kept


def review_packet(
    theme: Theme,
    topics: list[Topic],
    sentences_by_topic: dict[int, list],
    seed: int,
    n_random: int = 20,
) -> str:
    """Human review text: topic words, representatives, and random sentences."""
    by_id = {t.topic_id: t for t in topics}
    sentence_lookup = {
        s.sentence_id: s for members in sentences_by_topic.values() for s in members
    }
    lines = [f"THEME {theme.theme_id}: {theme.name} [{theme.category}]", ""]
    for tid in sorted(theme.topic_ids):
        topic = by_id[tid]
        lines.append(f"topic {tid} ({topic.n_sentences} sentences)")
        lines.append("  words: " + ", ".join(term for term, _ in topic.words))
        for sid in topic.representative_sentence_ids:
            sent = sentence_lookup.get(sid)
            if sent is not None:
                lines.append(f"  rep: {sent.text}")
        members = sentences_by_topic.get(tid, [])
        rng = np.random.Generator(np.random.PCG64(seed + tid))
        take = min(n_random, len(members))
        if take:
            idx = rng.choice(len(members), size=take, replace=False)
            for i in sorted(idx):
                lines.append(f"  sample: {members[i].text}")
        lines.append("")
    return "\n".join(lines)
