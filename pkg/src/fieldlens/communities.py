"""Louvain community detection and weakly connected components.

Citation edges are projected to an undirected weighted graph whose pair weight
is the number of directed citations between the two papers.
"""

from __future__ import annotations

import csv
import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Mapping

from .citegraph import CitationGraph
from .errors import EmptyGraph

_EPS = 1e-12


@dataclass(frozen=True)
class Partition:
    assignment: Mapping[Hashable, int]
    modularity: float
    seed: int
    resolution: float = 1.0
    history: tuple[float, ...] = field(default=(), compare=False)

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def members(self) -> dict[int, list]:
        out = defaultdict(list)
        for node, c in sorted(self.assignment.items()):
            out[c].append(node)
        return dict(sorted(out.items()))


def undirected_weights(g: CitationGraph) -> dict[tuple[str, str], float]:
    w: dict[tuple[str, str], float] = defaultdict(float)
    for u, v in g.edges:
        w[(u, v) if u < v else (v, u)] += 1.0
    return dict(w)


def modularity(nodes: Iterable[Hashable], weights: Mapping[tuple, float],
               assignment: Mapping[Hashable, int], resolution: float = 1.0) -> float:
    """Newman-Girvan modularity of ``assignment`` on an undirected weighted graph."""
    degree = {n: 0.0 for n in nodes}
    internal = defaultdict(float)
    for (u, v), w in weights.items():
        degree[u] += w
        degree[v] += w
        if assignment[u] == assignment[v]:
            internal[assignment[u]] += 2 * w
    two_m = sum(degree.values())
    if two_m == 0:
        return 0.0
    tot = defaultdict(float)
    for n, k in degree.items():
        tot[assignment[n]] += k
    return sum(internal[c] / two_m - resolution * (t / two_m) ** 2 for c, t in tot.items())


class _Level:
    """One aggregation level: nodes 0..n-1 with symmetric weighted adjacency."""

    def __init__(self, n: int, adj: list[dict[int, float]]):
        self.n = n
        self.adj = adj  # adj[i][i] is the self-loop weight
        self.k = [sum(w for j, w in a.items() if j != i) + 2 * a.get(i, 0.0) for i, a in enumerate(adj)]
        self.two_m = sum(self.k)

    def move_nodes(self, rng: random.Random, resolution: float) -> tuple[list[int], bool]:
        comm = list(range(self.n))
        tot = list(self.k)
        order = list(range(self.n))
        rng.shuffle(order)
        moved_any = False
        if self.two_m == 0:
            return comm, False
        improved = True
        while improved:
            improved = False
            for i in order:
                ki = self.k[i]
                old = comm[i]
                links = defaultdict(float)
                for j, w in self.adj[i].items():
                    if j != i:
                        links[comm[j]] += w
                tot[old] -= ki
                scale = resolution * ki / self.two_m

                def gain(c):
                    return links.get(c, 0.0) - tot[c] * scale

                best, best_gain = old, gain(old)
                for c in sorted(links):
                    g = gain(c)
                    # staying wins ties; among strictly better moves the lowest id wins
                    if g > best_gain + _EPS:
                        best, best_gain = c, g
                tot[best] += ki
                if best != old:
                    comm[i] = best
                    improved = moved_any = True
        return comm, moved_any

    def aggregate(self, comm: list[int]) -> tuple[_Level, list[int]]:
        relabel = {}
        for c in comm:
            relabel.setdefault(c, len(relabel))
        new_comm = [relabel[c] for c in comm]
        adj = [defaultdict(float) for _ in relabel]
        for i, a in enumerate(self.adj):
            ci = new_comm[i]
            for j, w in a.items():
                if j < i:
                    continue
                cj = new_comm[j]
                if ci == cj:
                    adj[ci][ci] += w
                else:
                    adj[ci][cj] += w
                    adj[cj][ci] += w
        return _Level(len(relabel), [dict(a) for a in adj]), new_comm


def louvain_weighted(nodes: Iterable[Hashable], weights: Mapping[tuple, float],
                     resolution: float = 1.0, seed: int = 0) -> Partition:
    nodes = sorted(set(nodes))
    if not nodes:
        raise EmptyGraph("louvain needs at least one node")
    index = {n: i for i, n in enumerate(nodes)}
    adj: list[dict[int, float]] = [defaultdict(float) for _ in nodes]
    for (u, v), w in sorted(weights.items()):
        i, j = index[u], index[v]
        if i == j:
            adj[i][i] += w
        else:
            adj[i][j] += w
            adj[j][i] += w
    level = _Level(len(nodes), [dict(a) for a in adj])
    rng = random.Random(seed)

    membership = list(range(len(nodes)))  # original node -> current level node
    history = []
    while True:
        comm, moved = level.move_nodes(rng, resolution)
        if not moved:
            break
        level, comm = level.aggregate(comm)
        membership = [comm[m] for m in membership]
        assignment = {n: membership[i] for i, n in enumerate(nodes)}
        history.append(modularity(nodes, weights, assignment, resolution))
        if level.n == 1:
            break

    # contiguous ids, numbered by first member in sorted node order
    relabel = {}
    for m in membership:
        relabel.setdefault(m, len(relabel))
    assignment = {n: relabel[membership[i]] for i, n in enumerate(nodes)}
    q = modularity(nodes, weights, assignment, resolution)
    if not history:
        history.append(q)
    return Partition(assignment, q, seed, resolution, tuple(history))


def louvain(g: CitationGraph, resolution: float = 1.0, seed: int = 0) -> Partition:
    if len(g) == 0:
        raise EmptyGraph("louvain needs a non-empty graph")
    return louvain_weighted(g.nodes, undirected_weights(g), resolution, seed)


# --- components ----------------------------------------------------------

@dataclass(frozen=True)
class ComponentReport:
    component_count: int
    sizes: tuple[tuple[int, int], ...]
    members: tuple[tuple[str, ...], ...] = field(default=(), compare=False)


def weak_components(nodes: Iterable[Hashable], edges: Iterable[tuple]) -> list[list]:
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups = defaultdict(list)
    for n in sorted(parent):
        groups[find(n)].append(n)
    return list(groups.values())


def components(g: CitationGraph) -> ComponentReport:
    comps = weak_components(g.nodes, g.edges)
    where = {n: i for i, c in enumerate(comps) for n in c}
    n_edges = [0] * len(comps)
    for u, _ in g.edges:
        n_edges[where[u]] += 1
    rows = sorted(((len(c), n_edges[i], tuple(c)) for i, c in enumerate(comps)),
                  key=lambda r: (-r[0], -r[1], r[2]))
    return ComponentReport(len(rows), tuple((n, m) for n, m, _ in rows), tuple(r[2] for r in rows))


# --- export --------------------------------------------------------------

def write_partition(p: Partition, csv_path: str | Path, summary_path: str | Path | None = None) -> None:
    with Path(csv_path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["doi", "community"])
        w.writerows(sorted(p.assignment.items()))
    if summary_path is not None:
        Path(summary_path).write_text(json.dumps({
            "modularity": p.modularity,
            "seed": p.seed,
            "resolution": p.resolution,
            "communities": p.n_communities,
            "history": list(p.history),
        }, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_partition(csv_path: str | Path, summary_path: str | Path | None = None) -> Partition:
    with Path(csv_path).open(encoding="utf-8", newline="") as fh:
        assignment = {r["doi"]: int(r["community"]) for r in csv.DictReader(fh)}
    meta = {"modularity": 0.0, "seed": 0, "resolution": 1.0, "history": []}
    if summary_path is not None and Path(summary_path).exists():
        meta.update(json.loads(Path(summary_path).read_text(encoding="utf-8")))
    return Partition(assignment, meta["modularity"], meta["seed"], meta["resolution"], tuple(meta["history"]))
