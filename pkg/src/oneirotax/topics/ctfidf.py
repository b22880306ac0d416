"""Class-based TF-IDF over per-topic concatenated sentences.

score(g, c) = tf(g, c) * log(1 + A / tf(g)) where tf(g, c) counts term g in
the concatenation of topic c's sentences, tf(g) sums tf(g, c) over topics,
and A is the mean token count per topic. Terms appearing in fewer than
min_df sentences, and stop words, are excluded. Terms are unigrams and
bigrams from the stop-word-filtered token stream.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict

from oneirotax.topics.tokenize import content_tokens, terms_of

log = logging.getLogger(__name__)


def ctfidf_scores(
    sentence_texts: list[str],
    labels: list[int],
    min_df: int = 10,
) -> dict[int, list[tuple[str, float]]]:
    """Per-topic term scores sorted by (score desc, term asc).

    labels align with sentence_texts; label -1 marks outlier sentences,
    which contribute to document frequencies but to no topic.
    """
    if len(sentence_texts) != len(labels):
        raise ValueError("labels misaligned with sentences")
    topics = sorted({c for c in labels if c >= 0})
    if not topics:
        raise ValueError("need at least one non-outlier topic")

    doc_freq: Counter[str] = Counter()
    tf_per_topic: dict[int, Counter[str]] = defaultdict(Counter)
    tokens_per_topic: Counter[int] = Counter()
    for text, label in zip(sentence_texts, labels):
        terms = terms_of(text)
        doc_freq.update(set(terms))
        if label >= 0:
            tf_per_topic[label].update(terms)
            tokens_per_topic[label] += len(content_tokens(text))

    eligible = {g for g, df in doc_freq.items() if df >= min_df}
    total_tf: Counter[str] = Counter()
    for counts in tf_per_topic.values():
        for g, tf in counts.items():
            if g in eligible:
                total_tf[g] += tf
    avg_tokens = sum(tokens_per_topic.values()) / len(topics)

    out: dict[int, list[tuple[str, float]]] = {}
    for c in topics:
        scored = [
            (g, tf * math.log(1.0 + avg_tokens / total_tf[g]))
            for g, tf in tf_per_topic[c].items()
            if g in eligible
        ]
        if not scored:
            log.warning("topic %d has no eligible terms", c)
        scored.sort(key=lambda kv: (-kv[1], kv[0]))
        out[c] = scored
    return out
