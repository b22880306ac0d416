"""Frequency tables and the backboned theme co-occurrence network."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

log = logging.getLogger(__name__)


@dataclass
class FrequencyRow:
    entity: int
    n_sentences: int
    n_docs: int
    n_authors: int


@dataclass
class WeightedGraph:
    nodes: list
    edges: dict[tuple, float] = field(default_factory=dict)

    def weight(self, u, v) -> float:
        return self.edges.get(self._key(u, v), 0.0)

    @staticmethod
    def _key(u, v) -> tuple:
        return (u, v) if u <= v else (v, u)

    def add(self, u, v, w: float = 1.0) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        key = self._key(u, v)
        self.edges[key] = self.edges.get(key, 0.0) + w

    def strength(self, u) -> float:
        return sum(w for (a, b), w in self.edges.items() if u in (a, b))


def frequency_table(
    level: str,
    doc_entities: dict[str, set[int]],
    doc_authors: dict[str, str],
    sentence_entities: dict[str, set[int]] | None = None,
) -> list[FrequencyRow]:
    """Counts per entity: a document counts if >= 1 of its sentences carries
    the entity; an author counts if any of their documents counts.

    doc_entities: doc_id -> entity ids present in the document.
    sentence_entities: sentence_id -> entity ids (for the sentence counts).
    """
    if level not in ("topic", "theme"):
        raise ValueError(f"unknown level {level!r}")
    docs: dict[int, set[str]] = {}
    authors: dict[int, set[str]] = {}
    for doc_id, entities in doc_entities.items():
        for e in entities:
            docs.setdefault(e, set()).add(doc_id)
            authors.setdefault(e, set()).add(doc_authors[doc_id])
    sentences: dict[int, int] = {}
    if sentence_entities:
        for _, entities in sentence_entities.items():
            for e in entities:
                sentences[e] = sentences.get(e, 0) + 1
    rows = [
        FrequencyRow(
            entity=e,
            n_sentences=sentences.get(e, 0),
            n_docs=len(doc_ids),
            n_authors=len(authors[e]),
        )
        for e, doc_ids in docs.items()
    ]
    rows.sort(key=lambda r: (-r.n_docs, r.entity))
    return rows


def cooccurrence(doc_entities: dict[str, set[int]]) -> WeightedGraph:
    """Edge weight = number of documents where both entities occur."""
    nodes = sorted(set().union(*doc_entities.values())) if doc_entities else []
    graph = WeightedGraph(nodes=nodes)
    for entities in doc_entities.values():
        ordered = sorted(entities)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1:]:
                graph.add(a, b, 1.0)
    return graph


def noise_corrected_backbone(graph: WeightedGraph, delta: float = 3.8) -> WeightedGraph:
    """Keep an edge iff its weight exceeds the null-model expectation by
    delta standard deviations.

    Null model: E[w_uv] = s_u * s_v / S with node strengths s and total edge
    weight S; the variance is the binomial approximation
    Var = S * p * (1 - p) with p = s_u * s_v / S^2. Node set is preserved;
    surviving edge weights are untouched.
    """
    S = sum(graph.edges.values())
    strengths = {u: graph.strength(u) for u in graph.nodes}
    backbone = WeightedGraph(nodes=list(graph.nodes))
    for (u, v), w in graph.edges.items():
        if S <= 0:
            continue
        p = strengths[u] * strengths[v] / (S * S)
        expected = S * p
        var = S * p * (1.0 - p)
        sigma = math.sqrt(var)
        if sigma > 0:
            score = (w - expected) / sigma
        else:
            # degenerate null (p in {0, 1}): no evidence either way
            score = 0.0
        if score >= delta:
            backbone.edges[(u, v)] = w
    if graph.edges and not backbone.edges:
        log.warning("backbone threshold delta=%s removed every edge", delta)
    return backbone


def threshold_backbone(graph: WeightedGraph, min_weight: float) -> WeightedGraph:
    """Plain weight-threshold backbone, kept for comparison runs."""
    backbone = WeightedGraph(nodes=list(graph.nodes))
    backbone.edges = {k: w for k, w in graph.edges.items() if w >= min_weight}
    return backbone


def edge_score(graph: WeightedGraph, u, v) -> float:
    """Null-model z-score of an edge (the quantity thresholded by delta)."""
    S = sum(graph.edges.values())
    p = graph.strength(u) * graph.strength(v) / (S * S)
    expected = S * p
    sigma = math.sqrt(S * p * (1.0 - p))
    w = graph.weight(u, v)
    return (w - expected) / sigma if sigma > 0 else 0.0


# --- Export / import --------------------------------------------------------

def export_edge_csv(graph: WeightedGraph) -> str:
    lines = ["source,target,weight"]
    rows = sorted((str(u), str(v), w) for (u, v), w in graph.edges.items())
    lines.extend(f"{u},{v},{w:.10g}" for u, v, w in rows)
    return "\n".join(lines) + "\n"


def import_edge_csv(text: str, nodes: list | None = None) -> WeightedGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "source,target,weight":
        raise ValueError("not an edge CSV (missing header)")
    edges: dict[tuple, float] = {}
    seen: set = set()
    for ln in lines[1:]:
        u, v, w = ln.split(",")
        u, v = _maybe_int(u), _maybe_int(v)
        key = WeightedGraph._key(u, v)
        edges[key] = float(w)
        seen.update(key)
    graph = WeightedGraph(nodes=nodes if nodes is not None else sorted(seen))
    graph.edges = edges
    return graph


def _maybe_int(s: str):
    try:
        return int(s)
    except ValueError:
        return s


def export_gexf(
    graph: WeightedGraph,
    node_labels: dict | None = None,
    node_sizes: dict | None = None,
) -> str:
    """Minimal GEXF with a per-node doc-count size attribute."""
    node_labels = node_labels or {}
    node_sizes = node_sizes or {}
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<gexf xmlns="http://www.gexf.net/1.2draft" version="1.2">',
        '  <graph defaultedgetype="undirected">',
        '    <attributes class="node">',
        '      <attribute id="0" title="n_docs" type="integer"/>',
        '    </attributes>',
        '    <nodes>',
    ]
    for u in graph.nodes:
        label = escape(str(node_labels.get(u, u)))
        size = int(node_sizes.get(u, 0))
        out.append(
            f'      <node id="{escape(str(u))}" label="{label}">'
            f'<attvalues><attvalue for="0" value="{size}"/></attvalues></node>'
        )
    out.append('    </nodes>')
    out.append('    <edges>')
    for i, ((u, v), w) in enumerate(sorted(graph.edges.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))):
        out.append(
            f'      <edge id="{i}" source="{escape(str(u))}" '
            f'target="{escape(str(v))}" weight="{w:.10g}"/>'
        )
    out.append('    </edges>')
    out.append('  </graph>')
    out.append('</gexf>')
    return "\n".join(out) + "\n"
