import json

import numpy as np
import pytest

from conftest import base_config, run_stages, write_config
from oneirotax.embedding import FileProvider, read_emb1, text_key


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]


class TestIngestArtifacts:
    def test_documents_sorted_by_time(self, full_run):
        out, _ = full_run
        docs = [json.loads(l) for l in (out / "documents.jsonl").read_text().splitlines()]
        stamps = [d["created_at"] for d in docs]
        assert stamps == sorted(stamps)
        assert len(docs) == 501

    def test_labels_cover_all_docs(self, full_run):
        out, _ = full_run
        rows = (out / "labels.csv").read_text().splitlines()[1:]
        assert len(rows) == 501
        labelled = [r for r in rows if r.split(",", 1)[1]]
        assert labelled  # the corpus plants dream-type keywords and flairs
        kinds = {lab for r in labelled for lab in r.split(",", 1)[1].split(";")}
        assert kinds <= {"nightmare", "recurring", "lucid", "vivid"}
        assert "nightmare" in kinds and "recurring" in kinds

    def test_corpus_stats_has_per_label_rows(self, full_run):
        out, _ = full_run
        rows = read_csv(out / "corpus_stats.csv")
        selections = {r["selection"] for r in rows}
        assert "all" in selections and "nightmare" in selections
        all_row = next(r for r in rows if r["selection"] == "all")
        assert int(all_row["n_documents"]) == 501


class TestEmbedArtifacts:
    def test_emb1_covers_every_sentence(self, full_run):
        out, _ = full_run
        keys, vectors = read_emb1(out / "sentences.emb1")
        sents = [json.loads(l) for l in (out / "sentences.jsonl").read_text().splitlines()]
        wanted = {text_key(s["text"]) for s in sents}
        assert wanted <= set(keys)
        assert vectors.shape[1] == 64

    def test_emb1_reusable_as_provider(self, full_run):
        out, _ = full_run
        sents = [json.loads(l) for l in (out / "sentences.jsonl").read_text().splitlines()]
        provider = FileProvider(out / "sentences.emb1")
        got = provider.embed_batch([s["text"] for s in sents[:20]])
        assert got.shape == (20, 64)


class TestTopicsArtifacts:
    def test_topic_table_schema(self, full_run):
        out, _ = full_run
        rows = read_csv(out / "topic_table.csv")
        assert len(rows) >= 10
        for i, r in enumerate(rows):
            assert int(r["topic_id"]) == i == int(r["rank"])
            terms = [r[f"term_{j}"] for j in range(1, 11) if r[f"term_{j}"]]
            weights = [float(r[f"weight_{j}"]) for j in range(1, 11) if r[f"weight_{j}"]]
            assert len(terms) == len(weights) >= 1
            assert sum(weights) == pytest.approx(1.0, abs=1e-6)
            assert "dream" not in terms and "dreams" not in terms
        sizes = [int(r["n_sentences"]) for r in rows]
        assert sizes == sorted(sizes, reverse=True)

    def test_assignments_cover_sentences(self, full_run):
        out, _ = full_run
        n_sents = len((out / "sentences.jsonl").read_text().splitlines())
        rows = (out / "assignments.csv").read_text().splitlines()[1:]
        assert len(rows) == n_sents
        tids = {int(r.rsplit(",", 1)[1]) for r in rows}
        assert min(tids) >= -1

    def test_vocabulary_pools_separated(self, full_run):
        out, _ = full_run
        rows = read_csv(out / "topic_table.csv")
        pools = {
            "teeth": {"dentist", "molars", "gums"},
            "water": {"ocean", "waves", "tide"},
            "chase": {"chased", "pursuer", "fleeing"},
        }
        hits = 0
        for vocab in pools.values():
            for r in rows:
                terms = " ".join(r[f"term_{j}"] for j in range(1, 11))
                if sum(1 for w in vocab if w in terms) >= 2:
                    hits += 1
                    break
        assert hits == len(pools)


class TestThemesAndDownstream:
    def test_every_topic_in_exactly_one_theme(self, full_run):
        out, _ = full_run
        obj = json.loads((out / "themes.json").read_text())
        seen = []
        for theme in obj["themes"]:
            assert theme["category"] == "dream_content"
            seen += theme["topic_ids"]
        n_topics = len(read_csv(out / "topic_table.csv"))
        assert sorted(seen) == list(range(n_topics))

    def test_frequency_tables_sorted(self, full_run):
        out, _ = full_run
        for fname in ("topic_freq.csv", "theme_freq.csv"):
            rows = read_csv(out / fname)
            docs = [int(r["n_docs"]) for r in rows]
            assert docs == sorted(docs, reverse=True)
            for r in rows:
                assert int(r["n_sentences"]) >= int(r["n_docs"]) >= int(r["n_authors"]) > 0

    def test_cooccurrence_weights_are_doc_counts(self, full_run):
        out, _ = full_run
        rows = read_csv(out / "cooccurrence_edges.csv")
        assert rows, "mixed-pool documents must produce co-occurrence edges"
        for r in rows:
            assert float(r["weight"]) == int(float(r["weight"])) >= 1

    def test_odds_tables(self, full_run):
        out, _ = full_run
        for fname in ("or_topics.csv", "or_themes.csv"):
            rows = read_csv(out / fname)
            assert rows
            by_type = {}
            for r in rows:
                by_type.setdefault(r["dream_type"], []).append(r)
            for dt, group in by_type.items():
                vals = [float(r["or_value"]) for r in group if r["or_value"]]
                assert vals == sorted(vals, reverse=True)
                for r in group:
                    # defined value or a reason, never both
                    assert bool(r["or_value"]) != bool(r["flag"])

    def test_trend_matrix_shape_and_months(self, full_run):
        out, _ = full_run
        lines = (out / "trend_matrix_themes.csv").read_text().splitlines()
        months = lines[0].split(",")[1:]
        # corpus pins full coverage of 2019-01 .. 2020-12; the stray
        # 2021-01 document must not create a column
        assert months[0] == "2019-01" and months[-1] == "2020-12"
        assert len(months) == 24
        assert "2021-01" not in months
        for ln in lines[1:]:
            assert len(ln.split(",")) == 25

    def test_trend_z_is_standardized(self, full_run):
        out, _ = full_run
        rows = read_csv(out / "trend_themes.csv")
        by_entity = {}
        for r in rows:
            by_entity.setdefault(r["entity"], []).append(float(r["z"]))
        for z in by_entity.values():
            if any(v != 0 for v in z):
                assert abs(np.mean(z)) < 1e-9
                assert np.var(z) == pytest.approx(1.0, abs=1e-6)

    def test_teeth_spike_march_2020(self, full_run):
        out, _ = full_run
        # find the topic whose terms mention dentist/molars, then its theme
        topics = read_csv(out / "topic_table.csv")
        teeth_topic = None
        for r in topics:
            terms = " ".join(r[f"term_{j}"] for j in range(1, 11))
            if "dentist" in terms or "molars" in terms:
                teeth_topic = r["topic_id"]
                break
        assert teeth_topic is not None
        rows = [r for r in read_csv(out / "trend_topics.csv") if r["entity"] == teeth_topic]
        z = {r["month"]: float(r["z"]) for r in rows}
        assert z["2020-03"] == max(z.values())

    def test_review_packets_one_per_theme(self, full_run):
        out, _ = full_run
        obj = json.loads((out / "themes.json").read_text())
        files = sorted((out / "review_packet").glob("theme_*.txt"))
        assert len(files) == len(obj["themes"])
        text = files[0].read_text()
        assert "THEME" in text and "words:" in text

    def test_report_summary(self, full_run):
        out, _ = full_run
        text = (out / "summary.txt").read_text()
        assert "documents: 501" in text
        assert "sha256=" in text


class TestAdjustmentsIntegration:
    def test_category_filter_flows_downstream(self, tmp_path, corpus_500):
        out = tmp_path / "out"
        run_stages(
            write_config(tmp_path / "base.json", base_config(corpus_500, out)),
            ["ingest", "embed", "topics", "themes"],
        )
        themes = json.loads((out / "themes.json").read_text())["themes"]
        victim = themes[0]["theme_id"]
        adj = tmp_path / "adj.jsonl"
        adj.write_text(json.dumps(
            {"action": "set_category", "theme": victim, "category": "social_artifact"}
        ) + "\n")
        cfg = write_config(
            tmp_path / "adj_cfg.json",
            base_config(corpus_500, out, adjustments=str(adj)),
        )
        run_stages(cfg, ["themes", "taxonomy", "odds", "trends"])
        new_themes = json.loads((out / "themes.json").read_text())["themes"]
        assert any(t["category"] == "social_artifact" for t in new_themes)
        kept_ids = {str(t["theme_id"]) for t in new_themes if t["category"] == "dream_content"}
        freq_ids = {r["theme_id"] for r in read_csv(out / "theme_freq.csv")}
        assert freq_ids <= kept_ids
        trend_ids = {r["entity"] for r in read_csv(out / "trend_themes.csv")}
        assert trend_ids <= kept_ids
        audit = (out / "adjustments_audit.txt").read_text()
        assert "set_category" in audit


class TestFullDeterminism:
    def test_two_runs_byte_identical_manifests(self, tmp_path, corpus_500, full_run):
        out1, cfg1 = full_run
        out2 = tmp_path / "out2"
        cfg2 = write_config(tmp_path / "cfg2.json", base_config(corpus_500, out2))
        run_stages(cfg2)
        m1 = (out1 / "manifest.json").read_bytes()
        m2 = (out2 / "manifest.json").read_bytes()
        assert m1 == m2
