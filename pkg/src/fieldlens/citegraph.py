"""Directed citation networks: construction, leaf pruning, merging, degree statistics.

An edge ``(u, v)`` means paper ``u`` cites paper ``v``. A field graph holds the
papers tagged with that field plus the works they cite, except works that are
themselves corpus papers of the *other* field only; citations into those
surface as cross edges when the two field graphs are merged.
"""

from __future__ import annotations

import csv
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import networkx as nx

from .corpus import Corpus
from .errors import EmptyGraph, ScopeError

FIELD_A = "FIELD_A"
FIELD_B = "FIELD_B"
MERGED = "MERGED"
SCOPES = (FIELD_A, FIELD_B, MERGED)

PRUNE_MODES = ("fixpoint", "single_pass")

Edge = tuple[str, str]


@dataclass(frozen=True)
class NodeRecord:
    doi: str
    in_field_a: bool
    in_field_b: bool
    seeded: bool = True

    @property
    def is_boundary(self) -> bool:
        return self.in_field_a and self.in_field_b

    @property
    def side(self) -> str:
        """"A", "B" or "boundary"."""
        if self.is_boundary:
            return "boundary"
        return "A" if self.in_field_a else "B"


@dataclass(frozen=True)
class CitationGraph:
    nodes: Mapping[str, NodeRecord]
    edges: frozenset[Edge]
    scope_label: str

    def __post_init__(self):
        if self.scope_label not in SCOPES:
            raise ValueError(f"unknown scope {self.scope_label!r}")
        nodes = dict(sorted(self.nodes.items()))
        edges = frozenset(self.edges)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop on {u}")
            if u not in nodes or v not in nodes:
                raise ValueError(f"edge {(u, v)} has an endpoint outside the node set")
        object.__setattr__(self, "nodes", MappingProxyType(nodes))
        object.__setattr__(self, "edges", edges)

    def __len__(self):
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def successors(self) -> Mapping[str, frozenset[str]]:
        out = defaultdict(set)
        for u, v in self.edges:
            out[u].add(v)
        return {n: frozenset(out.get(n, ())) for n in self.nodes}

    @cached_property
    def predecessors(self) -> Mapping[str, frozenset[str]]:
        inc = defaultdict(set)
        for u, v in self.edges:
            inc[v].add(u)
        return {n: frozenset(inc.get(n, ())) for n in self.nodes}

    def out_degree(self, n: str) -> int:
        return len(self.successors[n])

    def in_degree(self, n: str) -> int:
        return len(self.predecessors[n])

    def degree(self, n: str) -> int:
        return self.out_degree(n) + self.in_degree(n)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def boundary_nodes(self) -> set[str]:
        return {d for d, n in self.nodes.items() if n.is_boundary}

    def induced(self, keep: Iterable[str]) -> CitationGraph:
        keep = set(keep) & set(self.nodes)
        return CitationGraph(
            {d: self.nodes[d] for d in keep},
            frozenset((u, v) for u, v in self.edges if u in keep and v in keep),
            self.scope_label,
        )

    def edge_subgraph(self, edges: Iterable[Edge]) -> CitationGraph:
        """Graph on the given edges and their endpoints only (no isolated nodes)."""
        edges = frozenset(edges)
        ends = {x for e in edges for x in e}
        return CitationGraph({d: self.nodes[d] for d in ends}, edges, self.scope_label)

    def edge_kind(self, edge: Edge) -> str:
        u, v = (self.nodes[x] for x in edge)
        if u.is_boundary or v.is_boundary:
            return "boundary_incident"
        if u.side == v.side:
            return "intra_a" if u.side == "A" else "intra_b"
        return "cross"


def _scope_label_name(c: Corpus, scope: str) -> str:
    return c.field_a_label if scope == FIELD_A else c.field_b_label


def build_graph(c: Corpus, scope: str) -> CitationGraph:
    if scope == MERGED:
        return merge_graphs(build_graph(c, FIELD_A), build_graph(c, FIELD_B), c)
    if scope not in (FIELD_A, FIELD_B):
        raise ScopeError(f"unknown scope {scope!r}")
    if len(c) == 0:
        raise EmptyGraph("corpus is empty")
    label = _scope_label_name(c, scope)
    in_scope = {p.doi: p for p in c if label in p.fields}
    if not in_scope:
        raise EmptyGraph(f"no paper carries field label {label!r}")

    nodes: dict[str, NodeRecord] = {}
    for doi, p in in_scope.items():
        nodes[doi] = NodeRecord(
            doi,
            in_field_a=c.field_a_label in p.fields,
            in_field_b=c.field_b_label in p.fields,
            seeded=True,
        )
    edges = set()
    for doi, p in in_scope.items():
        for ref in p.references:
            if ref == doi:
                continue
            if ref in c and ref not in in_scope:
                # other-field paper: becomes a cross edge at merge time
                continue
            if ref not in nodes:
                nodes[ref] = NodeRecord(ref, scope == FIELD_A, scope == FIELD_B, seeded=False)
            edges.add((doi, ref))
    return CitationGraph(nodes, frozenset(edges), scope)


def prune_leaves(g: CitationGraph, mode: str = "fixpoint") -> CitationGraph:
    """Drop nodes of total degree < 2 (isolated nodes and leaves).

    ``single_pass`` removes every such node once, using the degrees of the
    input graph; ``fixpoint`` repeats until none remain (the 2-core of the
    underlying multigraph, hence independent of iteration order).
    """
    if mode not in PRUNE_MODES:
        raise ValueError(f"unknown prune mode {mode!r}")
    degree = Counter()
    for u, v in g.edges:
        degree[u] += 1
        degree[v] += 1
    alive = set(g.nodes)
    doomed = [n for n in alive if degree[n] < 2]
    if mode == "single_pass":
        return g.induced(alive - set(doomed))

    neighbours = defaultdict(list)
    for u, v in g.edges:
        neighbours[u].append(v)
        neighbours[v].append(u)
    stack = doomed
    removed = set()
    while stack:
        n = stack.pop()
        if n in removed:
            continue
        removed.add(n)
        for m in neighbours[n]:
            if m in removed:
                continue
            degree[m] -= 1
            if degree[m] < 2:
                stack.append(m)
    return g.induced(alive - removed)


def merge_graphs(a: CitationGraph, b: CitationGraph, full_corpus: Corpus) -> CitationGraph:
    if MERGED in (a.scope_label, b.scope_label):
        raise ScopeError("merge_graphs expects two field-scoped graphs")
    if a.scope_label == FIELD_B and b.scope_label == FIELD_A:
        a, b = b, a
    # with two graphs of the same scope, membership in both is what counts
    nodes = {}
    for doi in set(a.nodes) | set(b.nodes):
        na, nb = a.nodes.get(doi), b.nodes.get(doi)
        seeded = doi in full_corpus or any(n.seeded for n in (na, nb) if n)
        nodes[doi] = NodeRecord(doi, na is not None, nb is not None, seeded)
    edges = set(a.edges) | set(b.edges)
    for doi in nodes:
        paper = full_corpus.get(doi)
        if paper is None:
            continue
        edges.update((doi, r) for r in paper.references if r in nodes and r != doi)
    return CitationGraph(nodes, frozenset(edges), MERGED)


def boundary_subgraph(merged: CitationGraph) -> CitationGraph:
    """Citations touching at least one boundary paper, with their endpoints."""
    bd = merged.boundary_nodes()
    return merged.edge_subgraph(e for e in merged.edges if e[0] in bd or e[1] in bd)


# --- statistics ----------------------------------------------------------

@dataclass(frozen=True)
class Summary:
    n: int
    mean: float
    median: float
    mode: float
    min: float
    max: float
    stddev: float

    @classmethod
    def of(cls, values: list[int]) -> Summary:
        counts = Counter(values)
        top = max(counts.values())
        mode = min(v for v, c in counts.items() if c == top)
        return cls(
            n=len(values),
            mean=statistics.fmean(values),
            median=float(statistics.median(values)),
            mode=float(mode),
            min=float(min(values)),
            max=float(max(values)),
            stddev=statistics.pstdev(values),
        )


@dataclass(frozen=True)
class DegreeStats:
    outdegree: Summary
    indegree: Summary
    n_nodes: int = 0
    n_edges: int = 0


def degree_stats(g: CitationGraph, nonzero_only: bool = True) -> DegreeStats:
    if len(g) == 0:
        raise EmptyGraph("degree statistics need a non-empty graph")
    outs = [g.out_degree(n) for n in g.nodes]
    ins = [g.in_degree(n) for n in g.nodes]
    if nonzero_only:
        outs = [d for d in outs if d > 0]
        ins = [d for d in ins if d > 0]
        if not outs or not ins:
            raise EmptyGraph("graph has no edges; nonzero-only statistics are undefined")
    return DegreeStats(Summary.of(outs), Summary.of(ins), len(g), g.n_edges)


# --- serialization -------------------------------------------------------

def to_networkx(g: CitationGraph) -> nx.DiGraph:
    out = nx.DiGraph(scope=g.scope_label)
    for doi, n in g.nodes.items():
        out.add_node(doi, doi=doi, field_a=n.in_field_a, field_b=n.in_field_b,
                     boundary=n.is_boundary, seeded=n.seeded)
    for e in g.sorted_edges():
        out.add_edge(*e, kind=g.edge_kind(e))
    return out


def write_graphml(g: CitationGraph, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    nx.write_graphml(to_networkx(g), path)


def read_graphml(path: str | Path) -> CitationGraph:
    h = nx.read_graphml(Path(path))
    scope = h.graph.get("scope", MERGED)
    nodes = {
        str(n): NodeRecord(str(d.get("doi", n)), bool(d["field_a"]), bool(d["field_b"]), bool(d.get("seeded", True)))
        for n, d in h.nodes(data=True)
    }
    return CitationGraph(nodes, frozenset((str(u), str(v)) for u, v in h.edges()), scope)


def write_edge_list(g: CitationGraph, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["citing_doi", "cited_doi"])
        w.writerows(g.sorted_edges())


def read_edge_list(path: str | Path, nodes: Mapping[str, NodeRecord] | None = None,
                   scope: str = MERGED) -> CitationGraph:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    edges = frozenset((r["citing_doi"], r["cited_doi"]) for r in rows)
    if nodes is None:
        nodes = {x: NodeRecord(x, scope != FIELD_B, scope != FIELD_A) for e in edges for x in e}
    return CitationGraph(dict(nodes), edges, scope)
