"""Venue and author networks built from co-publication, with centralities.

Venue network: two venues are linked when some author published in both;
the weight is the number of such authors. Author network: two authors are
linked when they published in a common venue; the weight is the number of
shared venues. Each edge keeps its witnesses for provenance.
"""

from __future__ import annotations

import csv
import dataclasses
import heapq
import json
import re
from collections import defaultdict, deque
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Mapping

import networkx as nx

from .communities import weak_components
from .corpus import Corpus, VenueRef
from .errors import EmptyNetwork, MissingMetadata

MEASURES = ("weighted_degree", "betweenness", "closeness")


@dataclass(frozen=True)
class SocioNetwork:
    kind: str
    nodes: Mapping[str, str]  # id -> display label
    provenance: Mapping[tuple[str, str], frozenset[str]]  # sorted pair -> witnesses

    def __post_init__(self):
        if self.kind not in ("venue", "author"):
            raise ValueError(f"unknown network kind {self.kind!r}")
        for (u, v), wit in self.provenance.items():
            if u == v or u > v:
                raise ValueError(f"edge {(u, v)} must be an ordered pair of distinct ids")
            if not wit:
                raise ValueError(f"edge {(u, v)} has no witness")
        object.__setattr__(self, "nodes", dict(sorted(self.nodes.items())))
        object.__setattr__(self, "provenance", dict(sorted(self.provenance.items())))

    @property
    def edges(self) -> dict[tuple[str, str], int]:
        return {e: len(w) for e, w in self.provenance.items()}

    def adjacency(self) -> dict[str, dict[str, int]]:
        adj = {n: {} for n in self.nodes}
        for (u, v), w in self.edges.items():
            adj[u][v] = w
            adj[v][u] = w
        return adj

    def subnetwork(self, keep) -> SocioNetwork:
        keep = set(keep)
        return SocioNetwork(
            self.kind,
            {n: l for n, l in self.nodes.items() if n in keep},
            {e: w for e, w in self.provenance.items() if e[0] in keep and e[1] in keep},
        )


# --- venue aggregation ---------------------------------------------------

_YEAR = re.compile(r"(?<!\d)(?:19|20)\d{2}(?!\d)|'\d{2}\b")
_ORDINAL = re.compile(r"\b\d+(?:st|nd|rd|th)\b", re.IGNORECASE)
_PAREN = re.compile(r"\s*\([^)]*\)")


def series_name(name: str) -> str:
    """Venue name with years, edition ordinals and parenthesized acronyms removed."""
    s = _PAREN.sub(" ", name)
    s = _ORDINAL.sub(" ", _YEAR.sub(" ", s))
    s = re.sub(r"[\s,;:\-]+", " ", s).strip(" .")
    return s


def series_key(name: str) -> str:
    return re.sub(r"[^0-9a-z]+", "-", series_name(name).casefold()).strip("-")


@dataclass(frozen=True)
class VenueAggregationRule:
    same_series_patterns: Mapping[str, str] = field(default_factory=dict)
    group_threshold: int = 2
    group_labels: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.group_threshold < 1:
            raise ValueError("group_threshold must be >= 1")

    @classmethod
    def from_json(cls, obj: dict) -> VenueAggregationRule:
        groups = obj.get("group_labels") or {}
        if isinstance(groups, list):
            groups = {g: f"{g} aggregated proceedings" for g in groups}
        return cls(dict(obj.get("same_series_patterns") or {}), int(obj.get("group_threshold", 2)), dict(groups))

    @classmethod
    def load(cls, path: str | Path) -> VenueAggregationRule:
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _canonical_venue(v: VenueRef, rule: VenueAggregationRule) -> VenueRef:
    label = v.name or v.venue_id
    for pattern, canonical in rule.same_series_patterns.items():
        if re.search(pattern, label, re.IGNORECASE) or re.search(pattern, v.venue_id, re.IGNORECASE):
            return VenueRef(canonical, canonical, v.kind)
    key = series_key(label) or v.venue_id
    return VenueRef(key, series_name(label) or label, v.kind)


def _publisher_group(v: VenueRef, original: VenueRef, rule: VenueAggregationRule) -> str | None:
    for group in sorted(rule.group_labels):
        rx = re.compile(rf"\b{re.escape(group)}\b", re.IGNORECASE)
        if any(rx.search(s) for s in (v.name, original.name, original.venue_id)):
            return group
    return None


def aggregate_venues(corpus: Corpus, rule: VenueAggregationRule) -> Corpus:
    papers = dict(corpus.papers)
    canon: dict[str, VenueRef] = {}
    names: dict[str, str] = {}
    for doi, p in papers.items():
        if p.venue is None:
            continue
        cv = _canonical_venue(p.venue, rule)
        names.setdefault(cv.venue_id, cv.name)  # first name in DOI order
        canon[doi] = cv

    counts = defaultdict(int)
    for cv in canon.values():
        counts[cv.venue_id] += 1
    for doi, cv in canon.items():
        cv = dataclasses.replace(cv, name=names[cv.venue_id])
        if cv.kind == "conference" and counts[cv.venue_id] <= rule.group_threshold:
            group = _publisher_group(cv, papers[doi].venue, rule)
            if group is not None:
                label = rule.group_labels[group]
                cv = VenueRef(label, label, "aggregated-proceedings")
        papers[doi] = dataclasses.replace(papers[doi], venue=cv)
    return corpus.replace_papers(papers)


# --- construction --------------------------------------------------------

def build_socionet(corpus: Corpus, kind: str) -> SocioNetwork:
    if kind not in ("venue", "author"):
        raise ValueError(f"unknown network kind {kind!r}")
    with_venue = [p for p in corpus if p.venue is not None]
    if kind == "venue" and not with_venue:
        raise MissingMetadata("no record carries a venue")
    if kind == "author" and not any(p.authors for p in corpus):
        raise MissingMetadata("no record carries authors")

    venues_of: dict[str, set[str]] = defaultdict(set)
    authors_of: dict[str, set[str]] = defaultdict(set)
    venue_names: dict[str, str] = {}
    author_names: dict[str, str] = {}
    for p in corpus:
        for a in p.authors:
            author_names.setdefault(a.author_id, a.display_name or a.author_id)
        if p.venue is None:
            continue
        venue_names.setdefault(p.venue.venue_id, p.venue.name or p.venue.venue_id)
        for a in p.authors:
            venues_of[a.author_id].add(p.venue.venue_id)
            authors_of[p.venue.venue_id].add(a.author_id)

    if kind == "venue":
        nodes, groups = venue_names, venues_of
    else:
        nodes, groups = author_names, authors_of
    witnesses: dict[tuple[str, str], set[str]] = defaultdict(set)
    for witness, members in groups.items():
        for u, v in combinations(sorted(members), 2):
            witnesses[(u, v)].add(witness)
    return SocioNetwork(kind, nodes, {e: frozenset(w) for e, w in witnesses.items()})


# --- centrality ----------------------------------------------------------

@dataclass(frozen=True)
class CentralityTable:
    measure: str
    scores: Mapping[str, float]
    top: tuple[tuple[str, float], ...]

    def ranking(self) -> list[tuple[str, float]]:
        return rank(self.scores)


def rank(scores: Mapping[str, float]) -> list[tuple[str, float]]:
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def _shortest_paths(adj, s, use_weights):
    """Single-source shortest paths: (visit order, sigma, predecessors, dist)."""
    sigma = dict.fromkeys(adj, 0)
    pred = {v: [] for v in adj}
    dist = {s: 0}
    sigma[s] = 1
    order = []
    if not use_weights:
        q = deque([s])
        while q:
            v = q.popleft()
            order.append(v)
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    q.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    pred[w].append(v)
        return order, sigma, pred, dist
    seen = {s: 0}
    heap = [(0, s, s)]
    done = set()
    while heap:
        d, v, via = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        dist[v] = d
        order.append(v)
        for w, length in adj[v].items():
            nd = d + length
            if w not in seen or nd < seen[w]:
                seen[w] = nd
                sigma[w] = sigma[v]
                pred[w] = [v]
                heapq.heappush(heap, (nd, w, v))
            elif nd == seen[w] and w not in done:
                sigma[w] += sigma[v]
                pred[w].append(v)
    return order, sigma, pred, dist


def betweenness(net: SocioNetwork, use_weights: bool = False) -> dict[str, float]:
    """Unnormalized betweenness by dependency accumulation, each unordered pair once."""
    adj = net.adjacency()
    score = dict.fromkeys(adj, 0.0)
    for s in adj:
        order, sigma, pred, _ = _shortest_paths(adj, s, use_weights)
        delta = dict.fromkeys(order, 0.0)
        for w in reversed(order):
            for v in pred[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                score[w] += delta[w]
    return {n: b / 2.0 for n, b in score.items()}


def closeness(net: SocioNetwork, use_weights: bool = False) -> dict[str, float]:
    """1 / (sum of distances to reachable nodes); 0 for isolated nodes."""
    adj = net.adjacency()
    out = {}
    for s in adj:
        _, _, _, dist = _shortest_paths(adj, s, use_weights)
        total = sum(dist.values())
        out[s] = 1.0 / total if total > 0 else 0.0
    return out


def weighted_degree(net: SocioNetwork) -> dict[str, float]:
    out = dict.fromkeys(net.nodes, 0.0)
    for (u, v), w in net.edges.items():
        out[u] += w
        out[v] += w
    return out


def centrality(net: SocioNetwork, measure: str, top_k: int = 5,
               paths_use_weights: bool = False) -> CentralityTable:
    if not net.nodes:
        raise EmptyNetwork(f"{net.kind} network is empty")
    if measure == "weighted_degree":
        scores = weighted_degree(net)
    elif measure == "betweenness":
        scores = betweenness(net, paths_use_weights)
    elif measure == "closeness":
        scores = closeness(net, paths_use_weights)
    else:
        raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    return CentralityTable(measure, scores, tuple(rank(scores)[:top_k]))


def component_members(net: SocioNetwork) -> list[list[str]]:
    """Connected components, largest node count first, then edges, then smallest id."""
    comps = weak_components(net.nodes, net.provenance)
    where = {n: i for i, c in enumerate(comps) for n in c}
    n_edges = [0] * len(comps)
    for u, _ in net.provenance:
        n_edges[where[u]] += 1
    keyed = sorted(((-len(c), -n_edges[i], min(c), c) for i, c in enumerate(comps)))
    return [c for *_, c in keyed]


def main_component(net: SocioNetwork) -> SocioNetwork:
    if not net.nodes:
        raise EmptyNetwork(f"{net.kind} network is empty")
    return net.subnetwork(component_members(net)[0])


# --- export --------------------------------------------------------------

def to_networkx(net: SocioNetwork) -> nx.Graph:
    g = nx.Graph(kind=net.kind)
    for n, label in net.nodes.items():
        g.add_node(n, label=label)
    for (u, v), w in net.edges.items():
        g.add_edge(u, v, weight=w)
    return g


def write_graphml(net: SocioNetwork, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    nx.write_graphml(to_networkx(net), path)


def write_provenance(net: SocioNetwork, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target", "weight", "witnesses"])
        for (u, v), wit in net.provenance.items():
            w.writerow([u, v, len(wit), ";".join(sorted(wit))])


def read_network(graphml: str | Path, provenance_csv: str | Path) -> SocioNetwork:
    g = nx.read_graphml(Path(graphml))
    with Path(provenance_csv).open(encoding="utf-8", newline="") as fh:
        prov = {(r["source"], r["target"]): frozenset(r["witnesses"].split(";")) for r in csv.DictReader(fh)}
    return SocioNetwork(g.graph["kind"], {str(n): d.get("label", str(n)) for n, d in g.nodes(data=True)}, prov)
