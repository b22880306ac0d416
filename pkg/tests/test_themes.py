import json

import numpy as np
import pytest

from oneirotax.corpus import Sentence
from oneirotax.embedding import StubProvider, embed_texts
from oneirotax.themes import (
    AdjustmentScript,
    Theme,
    ThemeError,
    apply_adjustments,
    cluster_topics,
    filter_dream_content,
    kmeans,
    review_packet,
    standardize,
    topic_embedding,
)
from oneirotax.topics import Topic


def make_topic(tid, words, n=10):
    return Topic(topic_id=tid, words=words, n_sentences=n,
                 representative_sentence_ids=[])


class TestTopicEmbedding:
    def test_weighted_sum_oracle(self):
        provider = StubProvider(dim=16)
        topic = make_topic(0, [("water", 0.7), ("ocean-deep", 0.3)])
        got = topic_embedding(topic, provider).vector
        mat = embed_texts(provider, ["water", "ocean deep"]).values.astype(np.float64)
        want = 0.7 * mat[0] + 0.3 * mat[1]
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ThemeError, match="sum"):
            topic_embedding(make_topic(0, [("a", 0.5), ("b", 0.4)]), StubProvider(dim=8))

    def test_empty_topic_rejected(self):
        with pytest.raises(ThemeError, match="no terms"):
            topic_embedding(make_topic(0, []), StubProvider(dim=8))


class TestStandardize:
    def test_zero_mean_unit_variance(self):
        X = np.random.default_rng(0).standard_normal((50, 4)) * [1, 5, 10, 0.1] + 3
        Z = standardize(X)
        np.testing.assert_allclose(Z.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(Z.std(axis=0), 1, atol=1e-12)

    def test_constant_dimension_maps_to_zero(self):
        X = np.ones((10, 2))
        X[:, 1] = np.arange(10)
        Z = standardize(X)
        assert np.all(Z[:, 0] == 0)


class TestKmeans:
    def test_recovers_separated_blobs(self):
        rng = np.random.default_rng(1)
        X = np.vstack([
            rng.standard_normal((40, 3)) + [0, 0, 0],
            rng.standard_normal((40, 3)) + [20, 0, 0],
            rng.standard_normal((40, 3)) + [0, 20, 0],
        ])
        labels, inertia = kmeans(X, k=3, seed=0, restarts=5)
        for grp in (labels[:40], labels[40:80], labels[80:]):
            assert len(set(grp.tolist())) == 1
        assert len(set(labels.tolist())) == 3

    def test_deterministic_per_seed(self):
        X = np.random.default_rng(2).standard_normal((60, 4))
        a = kmeans(X, 4, seed=9, restarts=3)
        b = kmeans(X, 4, seed=9, restarts=3)
        np.testing.assert_array_equal(a[0], b[0])
        assert a[1] == b[1]

    def test_more_restarts_never_worse(self):
        X = np.random.default_rng(3).standard_normal((80, 5))
        _, i1 = kmeans(X, 6, seed=1, restarts=1)
        _, i20 = kmeans(X, 6, seed=1, restarts=20)
        assert i20 <= i1 + 1e-9

    def test_k_larger_than_n_rejected(self):
        with pytest.raises(ThemeError):
            kmeans(np.zeros((3, 2)), k=5, seed=0)


class TestClusterTopics:
    def test_groups_similar_topics(self):
        provider = StubProvider(dim=32)
        water = [make_topic(i, [("ocean", 0.5), ("waves", 0.5)], n=50 - i) for i in range(3)]
        teeth = [make_topic(i + 3, [("dentist", 0.5), ("molars", 0.5)], n=20 - i) for i in range(3)]
        embs = [topic_embedding(t, provider) for t in water + teeth]
        themes = cluster_topics(embs, water + teeth, k=2, reduce_to=4, seed=0, restarts=5)
        groups = sorted(sorted(t.topic_ids) for t in themes)
        assert groups == [[0, 1, 2], [3, 4, 5]]
        for t in themes:
            assert t.category == "dream_content"
            assert t.name  # named from leading topics

    def test_requires_at_least_k_topics(self):
        provider = StubProvider(dim=8)
        tp = make_topic(0, [("a", 1.0)])
        with pytest.raises(ThemeError, match="at least"):
            cluster_topics([topic_embedding(tp, provider)], [tp], k=5)


class TestAdjustments:
    def base(self):
        return [
            Theme(0, "alpha", {0, 1}, "dream_content"),
            Theme(1, "beta", {2}, "dream_content"),
            Theme(2, "gamma", {3, 4, 5}, "dream_content"),
        ]

    def run(self, actions):
        return apply_adjustments(self.base(), AdjustmentScript(actions=list(actions)))

    def test_rename(self):
        themes, _, audit = self.run([{"action": "rename", "theme": 0, "name": "flying"}])
        assert themes[0].name == "flying"
        assert "rename" in audit[0]

    def test_set_category(self):
        themes, _, _ = self.run([
            {"action": "set_category", "theme": 1, "category": "social_artifact"},
        ])
        assert themes[1].category == "social_artifact"

    def test_set_category_invalid(self):
        with pytest.raises(ThemeError, match="action 0"):
            self.run([{"action": "set_category", "theme": 1, "category": "junk"}])

    def test_move_topic(self):
        themes, _, _ = self.run([
            {"action": "move_topic", "topic": 2, "from": 1, "to": 0},
        ])
        by_id = {t.theme_id: t for t in themes}
        assert by_id[0].topic_ids == {0, 1, 2}
        assert by_id[1].topic_ids == set()

    def test_move_topic_not_present(self):
        with pytest.raises(ThemeError, match="action 0"):
            self.run([{"action": "move_topic", "topic": 9, "from": 1, "to": 0}])

    def test_split_exact_partition(self):
        themes, _, _ = self.run([
            {"action": "split", "theme": 2, "partition": [[3], [4, 5]],
             "names": ["one", "two"]},
        ])
        ids = {t.theme_id: t for t in themes}
        assert 2 not in ids
        new = [t for t in themes if t.name in ("one", "two")]
        assert sorted(sorted(t.topic_ids) for t in new) == [[3], [4, 5]]

    def test_split_incomplete_partition_fatal(self):
        with pytest.raises(ThemeError, match="exactly"):
            self.run([
                {"action": "split", "theme": 2, "partition": [[3], [4]],
                 "names": ["one", "two"]},
            ])

    def test_drop_topic(self):
        themes, dropped, _ = self.run([{"action": "drop_topic", "topic": 2}])
        assert dropped == [2]
        assert all(1 != t.theme_id for t in themes)  # theme 1 became empty

    def test_dangling_theme_reference(self):
        with pytest.raises(ThemeError, match="action 1"):
            self.run([
                {"action": "rename", "theme": 0, "name": "x"},
                {"action": "rename", "theme": 42, "name": "y"},
            ])

    def test_unknown_action(self):
        with pytest.raises(ThemeError, match="unknown action"):
            self.run([{"action": "transmogrify"}])

    def test_script_applied_once(self):
        script = AdjustmentScript(actions=[])
        apply_adjustments(self.base(), script)
        with pytest.raises(ThemeError, match="already applied"):
            apply_adjustments(self.base(), script)

    def test_ordering_matters(self):
        # split then rename one of the new themes by its fresh id
        themes, _, _ = self.run([
            {"action": "split", "theme": 2, "partition": [[3], [4, 5]],
             "names": ["one", "two"]},
            {"action": "rename", "theme": 3, "name": "renamed-after-split"},
        ])
        assert any(t.name == "renamed-after-split" for t in themes)

    def test_load_jsonl(self, tmp_path):
        path = tmp_path / "adj.jsonl"
        path.write_text('{"action": "rename", "theme": 0, "name": "n"}\n\n')
        script = AdjustmentScript.load(path)
        assert len(script.actions) == 1

    def test_originals_not_mutated(self):
        base = self.base()
        apply_adjustments(base, AdjustmentScript(actions=[
            {"action": "rename", "theme": 0, "name": "changed"},
        ]))
        assert base[0].name == "alpha"


class TestFilterDreamContent:
    def test_keeps_only_dream_content(self):
        themes = [
            Theme(0, "a", {0}, "dream_content"),
            Theme(1, "b", {1}, "waking"),
            Theme(2, "c", {2}, "dream_content"),
        ]
        kept = filter_dream_content(themes)
        assert [t.theme_id for t in kept] == [0, 2]

    def test_invalid_category_fatal(self):
        with pytest.raises(ThemeError, match="invalid category"):
            filter_dream_content([Theme(0, "a", {0}, "mystery")])


class TestReviewPacket:
    def test_contents_and_determinism(self):
        topic = make_topic(0, [("water", 1.0)], n=4)
        topic.representative_sentence_ids = ["d:0"]
        sents = [Sentence("d", i, f"sentence {i}.") for i in range(4)]
        theme = Theme(0, "watery", {0}, "dream_content")
        a = review_packet(theme, [topic], {0: sents}, seed=5)
        b = review_packet(theme, [topic], {0: sents}, seed=5)
        assert a == b
        assert "watery" in a and "water" in a
        assert "rep: sentence 0." in a
        c = review_packet(theme, [topic], {0: sents}, seed=6)
        assert isinstance(c, str)
