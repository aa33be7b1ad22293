import io
import json
import random

import pytest

from fieldlens import citegraph, corpus

FIXTURE1 = [
    {"doi": "a1", "title": "A1", "fields": ["BE"], "references": ["b1", "c1"]},
    {"doi": "a2", "title": "A2", "fields": ["BE"], "references": ["a1"]},
    {"doi": "b1", "title": "B1", "fields": ["BE", "CS"], "references": ["c2"]},
    {"doi": "c1", "title": "C1", "fields": ["CS"], "references": ["b1"]},
    {"doi": "c2", "title": "C2", "fields": ["CS"], "references": ["a2"]},
]


def corpus_from(records, **kw):
    return corpus.ingest_records(io.StringIO("\n".join(json.dumps(r) for r in records)), **kw)


def field_graphs(c):
    a = citegraph.build_graph(c, citegraph.FIELD_A)
    b = citegraph.build_graph(c, citegraph.FIELD_B)
    return a, b, citegraph.merge_graphs(a, b, c)


@pytest.fixture
def fixture1():
    return corpus_from(FIXTURE1)


@pytest.fixture
def fixture1_graphs(fixture1):
    return field_graphs(fixture1)


def random_corpus_records(rng: random.Random, max_nodes: int = 50):
    """Random two-field corpus; every paper has at least one label and some references."""
    n = rng.randint(2, max_nodes)
    dois = [f"10.1/p{i}" for i in range(n)]
    ext = [f"10.2/x{i}" for i in range(rng.randint(0, 8))]
    pool = dois + ext
    recs = []
    for d in dois:
        fields = rng.choice([["BE"], ["CS"], ["BE", "CS"], ["BE"], ["CS"]])
        refs = [r for r in rng.sample(pool, min(len(pool), rng.randint(0, 4))) if r != d]
        recs.append({"doi": d, "title": d, "fields": fields, "references": refs})
    return recs


def random_merged_graph(rng: random.Random, max_nodes: int = 40, boundary_share: float = 0.2,
                        density: float | None = None):
    n = rng.randint(1, max_nodes)
    nodes = {}
    for i in range(n):
        d = f"n{i:02d}"
        if rng.random() < boundary_share:
            nodes[d] = citegraph.NodeRecord(d, True, True)
        elif rng.random() < 0.5:
            nodes[d] = citegraph.NodeRecord(d, True, False)
        else:
            nodes[d] = citegraph.NodeRecord(d, False, True)
    p = density if density is not None else rng.uniform(0.02, 0.25)
    edges = {(u, v) for u in nodes for v in nodes if u != v and rng.random() < p}
    return citegraph.CitationGraph(nodes, frozenset(edges), citegraph.MERGED)


def simple_graph(edges, nodes=()):
    """Field-A graph from an edge list plus optional isolated nodes."""
    ns = {n: citegraph.NodeRecord(n, True, False) for e in edges for n in e}
    ns.update({n: citegraph.NodeRecord(n, True, False) for n in nodes})
    return citegraph.CitationGraph(ns, frozenset(edges), citegraph.FIELD_A)


def random_undirected_graph(rng: random.Random, max_nodes: int = 8):
    """Random directed graph whose undirected projection is roughly G(n, p), p ~ U(0.15, 0.6)."""
    n = rng.randint(1, max_nodes)
    nodes = [f"v{i}" for i in range(n)]
    p = rng.uniform(0.15, 0.6)
    edges = {(u, v) for u in nodes for v in nodes if u != v and rng.random() < p / 2}
    return simple_graph(edges, nodes)


def random_socio_network(rng: random.Random, max_nodes: int = 30):
    import itertools
    from fieldlens.socionet import SocioNetwork

    n = rng.randint(1, max_nodes)
    nodes = [f"n{i:02d}" for i in range(n)]
    p = rng.uniform(0.05, 0.3)
    prov = {e: frozenset({"w"}) for e in itertools.combinations(nodes, 2) if rng.random() < p}
    return SocioNetwork("author", {v: v for v in nodes}, prov)


# acceptance lines, printed at the end of the run
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {name} ({detail})")
