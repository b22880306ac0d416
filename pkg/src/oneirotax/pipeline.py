"""Stage implementations behind the CLI: each stage reads its upstream
artifacts from the output directory and writes its own atomically."""

from __future__ import annotations

import json
import os
from datetime import datetime
from pathlib import Path

import numpy as np

from oneirotax import analytics, taxonomy
from oneirotax.config import RunConfig
from oneirotax.corpus import (
    Corpus,
    Document,
    DreamType,
    Sentence,
    assign_dream_types,
    corpus_stats,
    filter_boilerplate,
    load_corpus,
    segment_corpus,
)
from oneirotax.embedding import (
    FileProvider,
    VectorCache,
    embed_texts,
    make_provider,
    text_key,
    write_emb1,
)
from oneirotax.manifest import Manifest, atomic_write_text
from oneirotax.themes import (
    AdjustmentScript,
    Theme,
    apply_adjustments,
    cluster_topics,
    filter_dream_content,
    review_packet,
    topic_embedding,
)
from oneirotax.topics import Topic, build_topics, doc_topics

N_TERMS = 10


class MissingDependency(Exception):
    def __init__(self, stage: str, needed: str):
        super().__init__(f"stage {stage!r} requires outputs of stage {needed!r}; run it first")
        self.stage = stage
        self.needed = needed


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def _out(cfg: RunConfig) -> Path:
    return Path(cfg.out)


def _need(cfg: RunConfig, stage: str, needed: str, *files: str) -> None:
    for f in files:
        if not (_out(cfg) / f).exists():
            raise MissingDependency(stage, needed)


def get_cache() -> VectorCache | None:
    root = os.environ.get("ONEIROTAX_CACHE")
    return VectorCache(root) if root else None


# --- artifact readers -------------------------------------------------------

def read_documents(cfg: RunConfig) -> list[Document]:
    docs = []
    with open(_out(cfg) / "documents.jsonl", encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            docs.append(Document(
                doc_id=obj["doc_id"],
                author_id=obj["author_id"],
                title=obj["title"],
                body=obj["body"],
                created_at=datetime.fromisoformat(obj["created_at"]),
                flairs=frozenset(obj["flairs"]),
            ))
    return docs


def read_sentences(cfg: RunConfig) -> list[Sentence]:
    out = []
    with open(_out(cfg) / "sentences.jsonl", encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            out.append(Sentence(doc_id=obj["doc_id"], index=obj["index"], text=obj["text"]))
    return out


def read_assignments(cfg: RunConfig) -> dict[str, int]:
    out = {}
    lines = (_out(cfg) / "assignments.csv").read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        sid, tid = line.rsplit(",", 1)
        out[sid] = int(tid)
    return out


def read_topic_table(cfg: RunConfig) -> list[Topic]:
    lines = (_out(cfg) / "topic_table.csv").read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    topics = []
    for line in lines[1:]:
        cells = line.split(",")
        row = dict(zip(header, cells))
        words = []
        for i in range(1, N_TERMS + 1):
            term = row[f"term_{i}"]
            if term:
                words.append((term, float(row[f"weight_{i}"])))
        topics.append(Topic(
            topic_id=int(row["topic_id"]),
            words=words,
            n_sentences=int(row["n_sentences"]),
            representative_sentence_ids=[],
            empty=not words,
        ))
    reps = {}
    rep_path = _out(cfg) / "representatives.jsonl"
    if rep_path.exists():
        with open(rep_path, encoding="utf-8") as fh:
            for line in fh:
                obj = json.loads(line)
                reps[obj["topic_id"]] = obj["sentence_ids"]
    for t in topics:
        t.representative_sentence_ids = reps.get(t.topic_id, [])
    return topics


def read_themes(cfg: RunConfig) -> tuple[list[Theme], list[int]]:
    obj = json.loads((_out(cfg) / "themes.json").read_text(encoding="utf-8"))
    themes = [
        Theme(
            theme_id=t["theme_id"], name=t["name"],
            topic_ids=set(t["topic_ids"]), category=t["category"],
        )
        for t in obj["themes"]
    ]
    return themes, obj.get("dropped_topics", [])


def read_dream_types(cfg: RunConfig) -> dict[str, set[str]]:
    """dream type -> doc ids, from labels.csv."""
    out: dict[str, set[str]] = {t.value: set() for t in DreamType}
    lines = (_out(cfg) / "labels.csv").read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        doc_id, labels = line.split(",", 1)
        for lab in labels.split(";"):
            if lab:
                out[lab].add(doc_id)
    return out


# --- shared derived views -----------------------------------------------

def document_views(cfg: RunConfig):
    """Per-document sentence topic lists and dream-content entity sets."""
    documents = read_documents(cfg)
    sentences = read_sentences(cfg)
    assignments = read_assignments(cfg)
    themes, _ = read_themes(cfg)
    content = filter_dream_content(themes)
    topic_theme = {
        tid: th.theme_id for th in content for tid in th.topic_ids
    }
    doc_sent_topics: dict[str, list[int]] = {d.doc_id: [] for d in documents}
    for s in sorted(sentences, key=lambda s: (s.doc_id, s.index)):
        doc_sent_topics[s.doc_id].append(assignments[s.sentence_id])
    return documents, doc_sent_topics, content, topic_theme


def entity_importances(doc_sent_topics, topic_theme):
    """(topic importances, theme importances): entity -> doc_id -> I."""
    topic_imp: dict[int, dict[str, float]] = {t: {} for t in topic_theme}
    theme_imp: dict[int, dict[str, float]] = {th: {} for th in set(topic_theme.values())}
    skipped = []
    for doc_id, topics in doc_sent_topics.items():
        n = len(topics)
        if n == 0:
            skipped.append(doc_id)
            continue
        for t in topic_imp:
            topic_imp[t][doc_id] = sum(1 for x in topics if x == t) / n
        sent_themes = [topic_theme.get(x) for x in topics]
        for th in theme_imp:
            theme_imp[th][doc_id] = sum(1 for x in sent_themes if x == th) / n
    return topic_imp, theme_imp, skipped


# --- stages -------------------------------------------------------------

def stage_ingest(cfg: RunConfig, manifest: Manifest) -> None:
    manifest.record_input(cfg.corpus)
    corpus = load_corpus(cfg.corpus)
    out = _out(cfg)

    doc_lines = []
    label_lines = ["doc_id,labels"]
    for d in corpus.documents:
        doc_lines.append(json.dumps({
            "doc_id": d.doc_id, "author_id": d.author_id,
            "title": d.title, "body": d.body,
            "created_at": d.created_at.isoformat(),
            "flairs": sorted(d.flairs),
        }, sort_keys=True, ensure_ascii=False))
        labels = sorted(t.value for t in assign_dream_types(d))
        label_lines.append(f"{d.doc_id},{';'.join(labels)}")
    atomic_write_text(out / "documents.jsonl", "\n".join(doc_lines) + ("\n" if doc_lines else ""))
    atomic_write_text(out / "labels.csv", "\n".join(label_lines) + "\n")

    rej_lines = [json.dumps(r, sort_keys=True, ensure_ascii=False) for r in corpus.rejected]
    atomic_write_text(out / "rejected.jsonl", "\n".join(rej_lines) + ("\n" if rej_lines else ""))

    sentences = segment_corpus(corpus)
    retained, removed = filter_boilerplate(sentences, n=cfg.boilerplate_top_n)
    sent_lines = [
        json.dumps({"doc_id": s.doc_id, "index": s.index, "text": s.text},
                   sort_keys=True, ensure_ascii=False)
        for s in retained
    ]
    atomic_write_text(out / "sentences.jsonl", "\n".join(sent_lines) + ("\n" if sent_lines else ""))
    removed_lines = ["sentence,frequency"] + [
        f"{json.dumps(text, ensure_ascii=False)},{freq}" for text, freq in removed
    ]
    atomic_write_text(out / "boilerplate_removed.csv", "\n".join(removed_lines) + "\n")

    stats_lines = ["selection,n_documents,n_authors,mean_sentences,std_sentences,"
                   "mean_words,std_words,mean_characters,std_characters,"
                   "median_sentences,median_words,median_characters"]
    selections: list[tuple[str, DreamType | None]] = [("all", None)]
    selections += [(t.value, t) for t in DreamType]
    for name, label in selections:
        try:
            st = corpus_stats(corpus, label)
        except Exception:
            continue
        stats_lines.append(",".join([
            name, str(st.n_documents), str(st.n_authors),
            _fmt(st.mean_sentences), _fmt(st.std_sentences),
            _fmt(st.mean_words), _fmt(st.std_words),
            _fmt(st.mean_characters), _fmt(st.std_characters),
            _fmt(st.median_sentences), _fmt(st.median_words),
            _fmt(st.median_characters),
        ]))
    atomic_write_text(out / "corpus_stats.csv", "\n".join(stats_lines) + "\n")

    manifest.record_stage("ingest", [
        out / "documents.jsonl", out / "labels.csv", out / "rejected.jsonl",
        out / "sentences.jsonl", out / "boilerplate_removed.csv",
        out / "corpus_stats.csv",
    ])


def stage_embed(cfg: RunConfig, manifest: Manifest) -> None:
    _need(cfg, "embed", "ingest", "sentences.jsonl")
    sentences = read_sentences(cfg)
    provider = make_provider(cfg.provider)
    texts = [s.text for s in sentences]
    if not texts:
        raise RuntimeError("no sentences to embed; corpus empty after filtering")
    matrix = embed_texts(provider, texts, cache=get_cache(), threads=cfg.threads)
    # dump unique rows as an EMB1 key-value file
    seen: dict[bytes, np.ndarray] = {}
    for key, row in zip(matrix.row_keys, matrix.values):
        seen.setdefault(key, row)
    keys = sorted(seen)
    out = _out(cfg)
    tmp = out / "sentences.emb1.tmp"
    write_emb1(tmp, keys, np.stack([seen[k] for k in keys]))
    os.replace(tmp, out / "sentences.emb1")
    manifest.record_stage("embed", [out / "sentences.emb1"])


def stage_topics(cfg: RunConfig, manifest: Manifest) -> None:
    _need(cfg, "topics", "ingest", "sentences.jsonl")
    _need(cfg, "topics", "embed", "sentences.emb1")
    out = _out(cfg)
    sentences = read_sentences(cfg)
    file_provider = FileProvider(
        out / "sentences.emb1", model_name=cfg.provider.model_name,
    )
    matrix = embed_texts(file_provider, [s.text for s in sentences])
    # term embeddings are not in the sentence dump; use the configured provider
    term_provider = make_provider(cfg.provider)
    params = cfg.clustering_params()
    model = build_topics(sentences, matrix, term_provider, params, cache=get_cache())

    header = ["topic_id", "rank", "n_sentences", "n_docs"]
    header += [f"term_{i}" for i in range(1, N_TERMS + 1)]
    header += [f"weight_{i}" for i in range(1, N_TERMS + 1)]
    doc_count: dict[int, set[str]] = {}
    for s in sentences:
        tid = model.assignments[s.sentence_id]
        if tid >= 0:
            doc_count.setdefault(tid, set()).add(s.doc_id)
    lines = [",".join(header)]
    for t in model.topics:
        terms = [term for term, _ in t.words] + [""] * (N_TERMS - len(t.words))
        weights = [_fmt(w) for _, w in t.words] + [""] * (N_TERMS - len(t.words))
        lines.append(",".join(
            [str(t.topic_id), str(t.topic_id), str(t.n_sentences),
             str(len(doc_count.get(t.topic_id, set())))] + terms + weights
        ))
    atomic_write_text(out / "topic_table.csv", "\n".join(lines) + "\n")

    assign_lines = ["sentence_id,topic_id"] + [
        f"{s.sentence_id},{model.assignments[s.sentence_id]}" for s in sentences
    ]
    atomic_write_text(out / "assignments.csv", "\n".join(assign_lines) + "\n")

    text_by_sid = {s.sentence_id: s.text for s in sentences}
    rep_lines = [
        json.dumps({
            "topic_id": t.topic_id,
            "sentence_ids": t.representative_sentence_ids,
            "texts": [text_by_sid[sid] for sid in t.representative_sentence_ids],
        }, sort_keys=True, ensure_ascii=False)
        for t in model.topics
    ]
    atomic_write_text(out / "representatives.jsonl", "\n".join(rep_lines) + ("\n" if rep_lines else ""))
    manifest.record_stage("topics", [
        out / "topic_table.csv", out / "assignments.csv", out / "representatives.jsonl",
    ])


def stage_themes(cfg: RunConfig, manifest: Manifest) -> None:
    _need(cfg, "themes", "topics", "topic_table.csv")
    out = _out(cfg)
    topics = [t for t in read_topic_table(cfg) if t.words]
    provider = make_provider(cfg.provider)
    cache = get_cache()
    embeddings = [topic_embedding(t, provider, cache=cache) for t in topics]
    themes = cluster_topics(
        embeddings, topics,
        k=cfg.themes.k, reduce_to=cfg.themes.reduce_to,
        seed=cfg.seed, restarts=cfg.themes.restarts,
    )
    dropped: list[int] = []
    audit: list[str] = []
    if cfg.adjustments:
        script = AdjustmentScript.load(cfg.adjustments)
        themes, dropped, audit = apply_adjustments(themes, script)
    obj = {
        "themes": [
            {
                "theme_id": t.theme_id, "name": t.name,
                "category": t.category, "topic_ids": sorted(t.topic_ids),
            }
            for t in sorted(themes, key=lambda t: t.theme_id)
        ],
        "dropped_topics": sorted(dropped),
    }
    atomic_write_text(out / "themes.json", json.dumps(obj, indent=2, sort_keys=True) + "\n")
    atomic_write_text(out / "adjustments_audit.txt", "\n".join(audit) + ("\n" if audit else ""))
    manifest.record_stage("themes", [out / "themes.json", out / "adjustments_audit.txt"])


def stage_taxonomy(cfg: RunConfig, manifest: Manifest) -> None:
    _need(cfg, "taxonomy", "themes", "themes.json")
    _need(cfg, "taxonomy", "topics", "assignments.csv")
    out = _out(cfg)
    documents, doc_sent_topics, content, topic_theme = document_views(cfg)
    authors = {d.doc_id: d.author_id for d in documents}

    doc_topic_sets = {
        doc_id: {t for t in topics if t in topic_theme}
        for doc_id, topics in doc_sent_topics.items()
    }
    doc_theme_sets = {
        doc_id: {topic_theme[t] for t in tset}
        for doc_id, tset in doc_topic_sets.items()
    }
    sent_topic = {}
    sent_theme = {}
    for doc_id, topics in doc_sent_topics.items():
        for i, t in enumerate(topics):
            if t in topic_theme:
                sent_topic[f"{doc_id}:{i}"] = {t}
                sent_theme[f"{doc_id}:{i}"] = {topic_theme[t]}

    for level, doc_sets, sent_sets, fname in (
        ("topic", doc_topic_sets, sent_topic, "topic_freq.csv"),
        ("theme", doc_theme_sets, sent_theme, "theme_freq.csv"),
    ):
        rows = taxonomy.frequency_table(level, doc_sets, authors, sent_sets)
        lines = [f"{level}_id,n_sentences,n_docs,n_authors"] + [
            f"{r.entity},{r.n_sentences},{r.n_docs},{r.n_authors}" for r in rows
        ]
        atomic_write_text(out / fname, "\n".join(lines) + "\n")

    graph = taxonomy.cooccurrence({d: s for d, s in doc_theme_sets.items() if s})
    graph.nodes = sorted({t.theme_id for t in content})
    atomic_write_text(out / "cooccurrence_edges.csv", taxonomy.export_edge_csv(graph))
    if cfg.backbone_method == "threshold":
        backbone = taxonomy.threshold_backbone(graph, cfg.backbone_delta)
    else:
        backbone = taxonomy.noise_corrected_backbone(graph, cfg.backbone_delta)
    atomic_write_text(out / "backbone_edges.csv", taxonomy.export_edge_csv(backbone))

    theme_docs = {t.theme_id: 0 for t in content}
    for sets in doc_theme_sets.values():
        for th in sets:
            theme_docs[th] += 1
    names = {t.theme_id: t.name for t in content}
    atomic_write_text(out / "backbone.gexf", taxonomy.export_gexf(
        backbone, node_labels=names, node_sizes=theme_docs,
    ))
    manifest.record_stage("taxonomy", [
        out / "topic_freq.csv", out / "theme_freq.csv",
        out / "cooccurrence_edges.csv", out / "backbone_edges.csv",
        out / "backbone.gexf",
    ])


def stage_odds(cfg: RunConfig, manifest: Manifest) -> None:
    _need(cfg, "odds", "themes", "themes.json")
    _need(cfg, "odds", "topics", "assignments.csv")
    out = _out(cfg)
    documents, doc_sent_topics, content, topic_theme = document_views(cfg)
    topic_imp, theme_imp, _ = entity_importances(doc_sent_topics, topic_theme)
    dream_types = read_dream_types(cfg)

    for fname, imps in (("or_topics.csv", topic_imp), ("or_themes.csv", theme_imp)):
        lines = ["dream_type,entity,or_value,flag"]
        for dt in sorted(dream_types):
            docs = dream_types[dt]
            records = []
            for entity in sorted(imps):
                imp = imps[entity]
                if not imp:
                    continue
                if not (docs & imp.keys()) or not (imp.keys() - docs):
                    continue
                rec = analytics.odds_ratio(dt, entity, imp, docs)
                records.append(rec)
            records.sort(key=lambda r: (-(r.or_value if r.or_value is not None else -1), r.entity))
            for r in records:
                val = _fmt(r.or_value) if r.or_value is not None else ""
                flag = r.undefined_reason or ""
                lines.append(f"{r.dream_type},{r.entity},{val},{flag}")
        atomic_write_text(out / fname, "\n".join(lines) + "\n")
    manifest.record_stage("odds", [out / "or_topics.csv", out / "or_themes.csv"])


def stage_trends(cfg: RunConfig, manifest: Manifest) -> None:
    _need(cfg, "trends", "themes", "themes.json")
    _need(cfg, "trends", "topics", "assignments.csv")
    out = _out(cfg)
    documents, doc_sent_topics, content, topic_theme = document_views(cfg)
    topic_imp, theme_imp, skipped = entity_importances(doc_sent_topics, topic_theme)
    timestamps = {
        d.doc_id: d.created_at for d in documents if d.doc_id not in set(skipped)
    }

    for fname, matrix_name, imps in (
        ("trend_topics.csv", "trend_matrix_topics.csv", topic_imp),
        ("trend_themes.csv", "trend_matrix_themes.csv", theme_imp),
    ):
        lines = ["entity,month,importance,z,z_smoothed"]
        matrix_rows = {}
        months_ref: list[str] = []
        for entity in sorted(imps):
            if not imps[entity]:
                continue
            ts = analytics.trend_series(
                entity, imps[entity], timestamps,
                min_monthly_docs=cfg.min_monthly_docs, window=cfg.trend_window,
            )
            months_ref = ts.months
            matrix_rows[entity] = ts.z_smoothed
            for m, i, z, zs in zip(ts.months, ts.importance, ts.z, ts.z_smoothed):
                lines.append(f"{entity},{m},{_fmt(i)},{_fmt(z)},{_fmt(zs)}")
        atomic_write_text(out / fname, "\n".join(lines) + "\n")
        mlines = ["entity," + ",".join(months_ref)]
        for entity, zs in sorted(matrix_rows.items()):
            mlines.append(f"{entity}," + ",".join(_fmt(v) for v in zs))
        atomic_write_text(out / matrix_name, "\n".join(mlines) + "\n")

    audit = ["doc_id"] + sorted(skipped)
    atomic_write_text(out / "trend_skipped_docs.csv", "\n".join(audit) + "\n")
    manifest.record_stage("trends", [
        out / "trend_topics.csv", out / "trend_matrix_topics.csv",
        out / "trend_themes.csv", out / "trend_matrix_themes.csv",
        out / "trend_skipped_docs.csv",
    ])


def stage_review_packet(cfg: RunConfig, manifest: Manifest) -> None:
    _need(cfg, "review-packet", "themes", "themes.json")
    _need(cfg, "review-packet", "topics", "assignments.csv")
    out = _out(cfg)
    sentences = read_sentences(cfg)
    assignments = read_assignments(cfg)
    topics = read_topic_table(cfg)
    themes, _ = read_themes(cfg)
    by_topic: dict[int, list[Sentence]] = {}
    for s in sentences:
        tid = assignments[s.sentence_id]
        if tid >= 0:
            by_topic.setdefault(tid, []).append(s)
    packet_dir = out / "review_packet"
    outputs = []
    for theme in sorted(themes, key=lambda t: t.theme_id):
        text = review_packet(theme, topics, by_topic, seed=cfg.seed)
        path = packet_dir / f"theme_{theme.theme_id}.txt"
        atomic_write_text(path, text + "\n")
        outputs.append(path)
    manifest.record_stage("review-packet", outputs)


def stage_report(cfg: RunConfig, manifest: Manifest) -> None:
    for stage, probe in (
        ("ingest", "documents.jsonl"), ("topics", "topic_table.csv"),
        ("themes", "themes.json"), ("taxonomy", "backbone_edges.csv"),
        ("odds", "or_topics.csv"), ("trends", "trend_matrix_themes.csv"),
    ):
        _need(cfg, "report", stage, probe)
    out = _out(cfg)
    documents = read_documents(cfg)
    sentences = read_sentences(cfg)
    topics = read_topic_table(cfg)
    themes, dropped = read_themes(cfg)
    content = [t for t in themes if t.category == "dream_content"]
    backbone_lines = (out / "backbone_edges.csv").read_text().splitlines()
    lines = [
        "oneirotax run summary",
        f"documents: {len(documents)}",
        f"authors: {len({d.author_id for d in documents})}",
        f"retained sentences: {len(sentences)}",
        f"topics: {len(topics)}",
        f"themes: {len(themes)} ({len(content)} dream_content)",
        f"dropped topics: {len(dropped)}",
        f"backbone edges: {max(0, len(backbone_lines) - 1)}",
        "",
        "artifacts:",
    ]
    for stage, files in sorted(manifest.data["stages"].items()):
        for name, digest in sorted(files.items()):
            lines.append(f"  [{stage}] {name} sha256={digest}")
    atomic_write_text(out / "summary.txt", "\n".join(lines) + "\n")
    manifest.record_stage("report", [out / "summary.txt"])


STAGES = {
    "ingest": stage_ingest,
    "embed": stage_embed,
    "topics": stage_topics,
    "themes": stage_themes,
    "taxonomy": stage_taxonomy,
    "odds": stage_odds,
    "trends": stage_trends,
    "review-packet": stage_review_packet,
    "report": stage_report,
}
