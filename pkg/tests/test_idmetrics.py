import math
import random

import pytest

from fieldlens import citegraph, idmetrics
from fieldlens.citegraph import MERGED, CitationGraph, NodeRecord
from fieldlens.errors import DegenerateMerged, EmptyGraph, ScopeError

from conftest import corpus_from, field_graphs, random_corpus_records


def test_boundary_set(fixture1_graphs):
    assert idmetrics.boundary_set(fixture1_graphs[2]) == {"b1"}


def test_boundary_set_requires_merged(fixture1_graphs):
    with pytest.raises(ScopeError):
        idmetrics.boundary_set(fixture1_graphs[0])


def test_fixture1_metrics(fixture1_graphs):
    r = idmetrics.compute_metrics(*fixture1_graphs)
    assert (r.n_k1, r.nc_k1, r.m1, r.m2, r.mb, r.mc, r.m_cross) == (1, 5, 2, 2, 0, 6, 2)
    assert r.idp == 0.2
    assert r.idl == pytest.approx(1 / 3, abs=1e-12)
    assert r.dominance == pytest.approx(0.6, abs=1e-12)
    assert r.overall_strength == pytest.approx(0.5333333333, abs=1e-9)
    assert (r.outflow_a_to_b, r.outflow_b_to_a) == (1, 1)
    assert (r.linkage_a_to_b, r.linkage_b_to_a) == (1.0, 1.0)


def test_identical_fields_give_infinite_dominance():
    c = corpus_from([{"doi": "a", "fields": ["BE", "CS"], "references": ["b"]},
                     {"doi": "b", "fields": ["BE", "CS"]}])
    r = idmetrics.compute_metrics(*field_graphs(c))
    assert r.idp == 1.0 and r.m_cross == 0 and r.idl == 0.0
    assert math.isinf(r.dominance)


def test_dominance_edge_cases():
    assert idmetrics.dominance(0.0, 0.0) is None
    assert idmetrics.dominance(0.5, 0.0) == math.inf
    assert idmetrics.dominance(0.2, 0.4) == 0.5


def test_degenerate_merged():
    nodes = {"x": NodeRecord("x", True, False)}
    a = CitationGraph(nodes, frozenset(), citegraph.FIELD_A)
    b = CitationGraph({"y": NodeRecord("y", False, True)}, frozenset(), citegraph.FIELD_B)
    m = CitationGraph({**nodes, "y": NodeRecord("y", False, True)}, frozenset(), MERGED)
    with pytest.raises(DegenerateMerged):
        idmetrics.compute_metrics(a, b, m)


def cross_fixture(a_cited, b_cited):
    """A-only and B-only papers with the given numbers of cross citations each way."""
    recs = []
    for i in range(b_cited):  # A papers citing B papers
        recs += [{"doi": f"a{i}", "fields": ["BE"], "references": [f"b{i}"]}, {"doi": f"b{i}", "fields": ["CS"]}]
    for i in range(a_cited):  # B papers citing A papers
        recs += [{"doi": f"bb{i}", "fields": ["CS"], "references": [f"aa{i}"]}, {"doi": f"aa{i}", "fields": ["BE"]}]
    return corpus_from(recs)


def test_linkage_three_vs_four():
    la, lb = idmetrics.linkage_factors(*field_graphs(cross_fixture(3, 4)))
    assert la == pytest.approx(0.75) and lb == pytest.approx(4 / 3)
    assert la * lb == pytest.approx(1.0)


def test_linkage_undefined_direction():
    la, lb = idmetrics.linkage_factors(*field_graphs(cross_fixture(2, 0)))
    assert la is None and lb == 0.0


def test_linkage_include_boundary():
    # hand-built graphs: the cross edges b0->x and x->a0 touch boundary paper x
    A, B, X = NodeRecord("a0", True, False), NodeRecord("b0", False, True), NodeRecord("x", True, True)
    a = CitationGraph({"a0": A, "x": X}, frozenset(), citegraph.FIELD_A)
    b = CitationGraph({"b0": B, "x": X}, frozenset(), citegraph.FIELD_B)
    m = CitationGraph({"a0": A, "b0": B, "x": X},
                      frozenset({("b0", "x"), ("x", "a0"), ("b0", "a0")}), MERGED)
    assert idmetrics.outflows(a, b, m) == (1, 0)
    # x cited by b0 stands in for field A; x citing a0 stands in for field B
    assert idmetrics.outflows(a, b, m, include_boundary=True) == (3, 0)


def test_report_json_roundtrip(fixture1_graphs):
    r = idmetrics.compute_metrics(*fixture1_graphs)
    assert idmetrics.IdMetricsReport.from_json(r.to_json()) == r


def test_random_pairs_properties():
    rng = random.Random(5)
    seen = 0
    while seen < 60:
        c = corpus_from(random_corpus_records(rng, 40))
        try:
            a, b, m = field_graphs(c)
            r = idmetrics.compute_metrics(a, b, m)
        except (EmptyGraph, DegenerateMerged):
            continue
        seen += 1
        assert 0 <= r.idp <= 1 and 0 <= r.idl <= 1
        assert r.m_cross == len(idmetrics.cross_edges(a, b, m)) >= 0
