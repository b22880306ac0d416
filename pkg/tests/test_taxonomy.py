import math
from xml.etree import ElementTree

import pytest

from oneirotax.taxonomy import (
    WeightedGraph,
    cooccurrence,
    edge_score,
    export_edge_csv,
    export_gexf,
    frequency_table,
    import_edge_csv,
    noise_corrected_backbone,
    threshold_backbone,
)


class TestWeightedGraph:
    def test_add_accumulates_symmetric(self):
        g = WeightedGraph(nodes=[1, 2])
        g.add(1, 2)
        g.add(2, 1, 2.0)
        assert g.weight(1, 2) == 3.0
        assert g.weight(2, 1) == 3.0

    def test_self_loop_rejected(self):
        g = WeightedGraph(nodes=[1])
        with pytest.raises(ValueError):
            g.add(1, 1)

    def test_strength(self):
        g = WeightedGraph(nodes=[1, 2, 3])
        g.add(1, 2, 2.0)
        g.add(1, 3, 3.0)
        assert g.strength(1) == 5.0
        assert g.strength(2) == 2.0


class TestFrequencyTable:
    def test_hand_counts(self):
        doc_entities = {
            "d1": {0, 1},
            "d2": {0},
            "d3": {1},
            "d4": set(),
        }
        doc_authors = {"d1": "a", "d2": "a", "d3": "b", "d4": "c"}
        sentence_entities = {
            "d1:0": {0}, "d1:1": {0, 1}, "d2:0": {0}, "d3:0": {1},
        }
        rows = frequency_table("topic", doc_entities, doc_authors, sentence_entities)
        by_entity = {r.entity: r for r in rows}
        assert by_entity[0].n_docs == 2
        assert by_entity[0].n_authors == 1   # both docs by author a
        assert by_entity[0].n_sentences == 3
        assert by_entity[1].n_docs == 2
        assert by_entity[1].n_authors == 2
        assert by_entity[1].n_sentences == 2
        # sorted by docs desc then entity asc
        assert [r.entity for r in rows] == [0, 1]

    def test_unknown_level(self):
        with pytest.raises(ValueError):
            frequency_table("paragraph", {}, {})


class TestCooccurrence:
    def test_doc_level_pairs(self):
        g = cooccurrence({"d1": {0, 1, 2}, "d2": {0, 1}, "d3": {2}})
        assert g.weight(0, 1) == 2.0
        assert g.weight(0, 2) == 1.0
        assert g.weight(1, 2) == 1.0
        assert g.nodes == [0, 1, 2]


def star_graph():
    """Hub 0 connected to 1, 2, 3 with weight 1 each, plus edge (1,2)."""
    g = WeightedGraph(nodes=[0, 1, 2, 3])
    g.add(0, 1)
    g.add(0, 2)
    g.add(0, 3)
    g.add(1, 2)
    return g


class TestBackbone:
    def test_star_hand_computation(self):
        g = star_graph()
        # S = 4; strengths: s0=3, s1=2, s2=2, s3=1
        # edge (1,2): p = 4/16 = 0.25, E = 1, Var = 4*0.25*0.75 = 0.75
        # score = (1-1)/sqrt(0.75) = 0
        assert edge_score(g, 1, 2) == pytest.approx(0.0, abs=1e-12)
        # edge (0,3): p = 3/16, E = 0.75, Var = 4 * 3/16 * 13/16
        var = 4 * (3 / 16) * (13 / 16)
        assert edge_score(g, 0, 3) == pytest.approx((1 - 0.75) / math.sqrt(var), rel=1e-12)

    def test_monotone_in_delta(self):
        g = star_graph()
        sizes = [
            len(noise_corrected_backbone(g, delta).edges)
            for delta in (-10.0, 0.0, 0.2, 1.0, 3.8)
        ]
        assert sizes == sorted(sizes, reverse=True)
        assert sizes[0] == 4          # very negative delta keeps everything
        assert sizes[-1] == 0

    def test_surviving_weights_untouched_and_nodes_preserved(self):
        g = star_graph()
        bb = noise_corrected_backbone(g, delta=0.0)
        assert bb.nodes == g.nodes
        for key, w in bb.edges.items():
            assert w == g.edges[key]

    def test_degenerate_sigma_keeps_nothing_positive(self):
        # a single edge graph: p = 1, sigma = 0 -> score 0
        g = WeightedGraph(nodes=[0, 1])
        g.add(0, 1, 5.0)
        assert len(noise_corrected_backbone(g, delta=0.1).edges) == 0
        assert len(noise_corrected_backbone(g, delta=0.0).edges) == 1

    def test_threshold_backbone(self):
        g = star_graph()
        g.add(1, 2, 4.0)  # weight now 5
        bb = threshold_backbone(g, 2.0)
        assert list(bb.edges) == [(1, 2)]


class TestExport:
    def test_csv_roundtrip(self):
        g = star_graph()
        text = export_edge_csv(g)
        assert text.splitlines()[0] == "source,target,weight"
        back = import_edge_csv(text)
        assert back.edges == g.edges

    def test_csv_rows_sorted(self):
        g = star_graph()
        rows = export_edge_csv(g).splitlines()[1:]
        assert rows == sorted(rows)

    def test_import_rejects_bad_header(self):
        with pytest.raises(ValueError, match="header"):
            import_edge_csv("a,b\n1,2\n")

    def test_gexf_well_formed(self):
        g = star_graph()
        xml = export_gexf(g, node_labels={0: "hub"}, node_sizes={0: 9})
        root = ElementTree.fromstring(xml)
        ns = "{http://www.gexf.net/1.2draft}"
        nodes = root.findall(f".//{ns}node")
        edges = root.findall(f".//{ns}edge")
        assert len(nodes) == 4
        assert len(edges) == 4
        hub = [n for n in nodes if n.get("id") == "0"][0]
        assert hub.get("label") == "hub"
        att = hub.find(f"{ns}attvalues/{ns}attvalue")
        assert att.get("value") == "9"
