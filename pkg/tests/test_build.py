import numpy as np
import pytest

from oneirotax.corpus import Sentence
from oneirotax.embedding import EmbeddingMatrix, StubProvider, embed_texts
from oneirotax.topics import (
    ClusteringParams,
    build_topics,
    doc_topics,
    merge_similar_topics,
    rank_clusters,
    strip_and_renormalize,
)


class TestStripAndRenormalize:
    def test_banned_unigrams_removed_and_refilled(self):
        candidates = [("dream", 4.0), ("water", 3.0), ("ocean", 2.0), ("waves", 1.0)]
        words = strip_and_renormalize(["dream", "water", "ocean"], candidates, k=3)
        terms = [t for t, _ in words]
        assert "dream" not in terms
        assert terms == ["water", "ocean", "waves"]
        assert sum(w for _, w in words) == pytest.approx(1.0, abs=1e-12)
        # relative proportions preserved: 3:2:1
        assert words[0][1] == pytest.approx(0.5, abs=1e-12)

    def test_bigrams_containing_banned_token_survive(self):
        candidates = [("dream-water", 2.0), ("dreams", 1.5), ("ocean", 1.0)]
        words = strip_and_renormalize(["dream-water", "dreams", "ocean"], candidates, k=3)
        terms = [t for t, _ in words]
        assert "dream-water" in terms and "dreams" not in terms

    def test_weights_sorted_desc(self):
        candidates = [("a", 1.0), ("b", 5.0), ("c", 2.0)]
        words = strip_and_renormalize(["a", "b", "c"], candidates, k=3)
        weights = [w for _, w in words]
        assert weights == sorted(weights, reverse=True)

    def test_all_banned_returns_empty(self):
        assert strip_and_renormalize(["dream"], [("dream", 1.0)], k=3) == []


class TestRanking:
    def test_rank_by_size_then_label(self):
        labels = np.array([2, 2, 2, 0, 0, 5, 5, 5, -1])
        # sizes: 2 -> 3, 0 -> 2, 5 -> 3; tie between 2 and 5 -> lower label first
        assert rank_clusters(labels) == {2: 0, 5: 1, 0: 2}

    def test_doc_topics_first_occurrence_order(self):
        assert doc_topics([3, -1, 1, 3, 2, 1]) == [3, 1, 2]
        assert doc_topics([-1, -1]) == []


class TestMerge:
    def test_identical_representations_merge(self):
        labels = np.array([0, 0, 1, 1, -1])
        scores = {
            0: [("cat", 2.0), ("dog", 1.0)],
            1: [("cat", 4.0), ("dog", 2.0)],   # same direction -> cosine 1
        }
        merged = merge_similar_topics(labels, scores, threshold=0.85)
        assert set(merged[:4]) == {0}
        assert merged[4] == -1

    def test_orthogonal_representations_stay(self):
        labels = np.array([0, 0, 1, 1])
        scores = {0: [("cat", 1.0)], 1: [("bird", 1.0)]}
        merged = merge_similar_topics(labels, scores, threshold=0.85)
        assert set(merged) == {0, 1}

    def test_transitive_union(self):
        labels = np.array([0, 1, 2])
        v = [("x", 1.0), ("y", 1.0)]
        scores = {0: v, 1: v, 2: v}
        merged = merge_similar_topics(labels, scores, threshold=0.99)
        assert set(merged) == {0}


def themed_sentences(n_per=40):
    """Two obvious vocabulary groups plus a couple of stray sentences."""
    rng = np.random.default_rng(0)
    water = ["ocean", "waves", "swimming", "tide", "beach", "underwater"]
    teeth = ["teeth", "dentist", "molars", "crumbling", "gums", "loose"]
    sents = []
    for i in range(n_per):
        w = rng.choice(water, size=4, replace=False)
        sents.append(Sentence("dw", i, " ".join(w) + "."))
    for i in range(n_per):
        w = rng.choice(teeth, size=4, replace=False)
        sents.append(Sentence("dt", i, " ".join(w) + "."))
    sents.append(Sentence("dx", 0, "completely unrelated galaxy quasar."))
    return sents


@pytest.fixture(scope="module")
def model():
    sents = themed_sentences()
    provider = StubProvider(dim=48)
    matrix = embed_texts(provider, [s.text for s in sents])
    params = ClusteringParams(
        seed=7, reduce_dim=5, min_topic_size=20, min_df=2, auto_merge=True,
    )
    return sents, build_topics(sents, matrix, provider, params)


class TestBuildTopics:
    def test_two_topics_matching_vocabularies(self, model):
        sents, tm = model
        assert len(tm.topics) == 2
        vocab0 = {t.split("-")[0] for t, _ in tm.topics[0].words}
        vocab1 = {t.split("-")[0] for t, _ in tm.topics[1].words}
        water = {"ocean", "waves", "swimming", "tide", "beach", "underwater"}
        # each topic's unigram stems come from exactly one pool
        assert (vocab0 <= water) != (vocab1 <= water) or vocab0 != vocab1

    def test_assignments_cover_every_sentence(self, model):
        sents, tm = model
        assert set(tm.assignments) == {s.sentence_id for s in sents}

    def test_topic_ids_are_ranks(self, model):
        _, tm = model
        assert [t.topic_id for t in tm.topics] == list(range(len(tm.topics)))
        sizes = [t.n_sentences for t in tm.topics]
        assert sizes == sorted(sizes, reverse=True)

    def test_weights_sum_to_one(self, model):
        _, tm = model
        for t in tm.topics:
            assert sum(w for _, w in t.words) == pytest.approx(1.0, abs=1e-9)

    def test_representatives_belong_to_topic(self, model):
        _, tm = model
        for t in tm.topics:
            assert 1 <= len(t.representative_sentence_ids) <= 3
            for sid in t.representative_sentence_ids:
                assert tm.assignments[sid] == t.topic_id

    def test_duplicate_sentences_share_topic(self):
        sents = themed_sentences()
        # duplicate one water sentence many times under a new document
        dupes = [Sentence("ddup", i, sents[0].text) for i in range(5)]
        all_sents = sents + dupes
        provider = StubProvider(dim=48)
        matrix = embed_texts(provider, [s.text for s in all_sents])
        params = ClusteringParams(seed=7, reduce_dim=5, min_topic_size=20, min_df=2)
        tm = build_topics(all_sents, matrix, provider, params)
        ids = {tm.assignments[s.sentence_id] for s in dupes}
        ids.add(tm.assignments[sents[0].sentence_id])
        assert len(ids) == 1

    def test_deterministic(self):
        sents = themed_sentences()
        provider = StubProvider(dim=48)
        matrix = embed_texts(provider, [s.text for s in sents])
        params = ClusteringParams(seed=7, reduce_dim=5, min_topic_size=20, min_df=2)
        a = build_topics(sents, matrix, provider, params)
        b = build_topics(sents, matrix, provider, params)
        assert a.assignments == b.assignments
        assert [t.words for t in a.topics] == [t.words for t in b.topics]

    def test_misaligned_embeddings_rejected(self):
        sents = themed_sentences()
        provider = StubProvider(dim=16)
        matrix = embed_texts(provider, ["just one"])
        with pytest.raises(ValueError, match="misaligned"):
            build_topics(sents, matrix, provider, ClusteringParams(seed=0, min_topic_size=5))


class TestClusteringParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            ClusteringParams(seed=0, min_topic_size=1)
        with pytest.raises(ValueError):
            ClusteringParams(seed=0, mmr_diversity=2.0)
