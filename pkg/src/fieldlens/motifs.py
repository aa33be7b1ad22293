"""Boundary-paper interaction patterns ("kinds of emergence").

Counting is per interaction instance, not per paper: every qualifying pair of
citations through a boundary pivot is one instance. A neighbouring boundary
paper is only ever counted by the boundary -> boundary rule.

Instance edge layout (``MotifInstance.edges``):

==========================  =====================================
diffusion / circular        (x -> pivot, pivot -> y)
CROSS_FERTILIZATION         (pivot -> a, pivot -> b)
BOUNDARY_TRIGGERED          (a -> pivot, b -> pivot)
INTERDISCIPLINARY_EMERGENCE (pivot -> q,)
==========================  =====================================
where ``a`` / ``b`` are exclusive to field A / field B.
"""

from __future__ import annotations

import csv
import enum
from collections import Counter
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Iterable, Mapping

from .citegraph import MERGED, CitationGraph, Edge
from .errors import ScopeError, UnknownKind


class MotifKind(enum.Enum):
    INTER_DIFFUSION_A2B = "INTER_DIFFUSION_A2B"
    INTER_DIFFUSION_B2A = "INTER_DIFFUSION_B2A"
    CIRCULAR_A = "CIRCULAR_A"
    CIRCULAR_B = "CIRCULAR_B"
    CROSS_FERTILIZATION = "CROSS_FERTILIZATION"
    BOUNDARY_TRIGGERED = "BOUNDARY_TRIGGERED"
    INTERDISCIPLINARY_EMERGENCE = "INTERDISCIPLINARY_EMERGENCE"

    @property
    def group(self) -> MotifGroup:
        return _GROUP_OF[self]


class MotifGroup(enum.Enum):
    INTERDISCIPLINARY_DIFFUSION = "interdisciplinary_diffusion"
    CIRCULAR_DIFFUSION = "circular_diffusion"
    CROSS_FERTILIZATION = "cross_fertilization"
    BOUNDARY_TRIGGERED = "boundary_triggered"
    INTERDISCIPLINARY_EMERGENCE = "interdisciplinary_emergence"

    @property
    def kinds(self) -> tuple[MotifKind, ...]:
        return tuple(k for k in MotifKind if _GROUP_OF[k] is self)


_GROUP_OF = {
    MotifKind.INTER_DIFFUSION_A2B: MotifGroup.INTERDISCIPLINARY_DIFFUSION,
    MotifKind.INTER_DIFFUSION_B2A: MotifGroup.INTERDISCIPLINARY_DIFFUSION,
    MotifKind.CIRCULAR_A: MotifGroup.CIRCULAR_DIFFUSION,
    MotifKind.CIRCULAR_B: MotifGroup.CIRCULAR_DIFFUSION,
    MotifKind.CROSS_FERTILIZATION: MotifGroup.CROSS_FERTILIZATION,
    MotifKind.BOUNDARY_TRIGGERED: MotifGroup.BOUNDARY_TRIGGERED,
    MotifKind.INTERDISCIPLINARY_EMERGENCE: MotifGroup.INTERDISCIPLINARY_EMERGENCE,
}

_CHAIN_KIND = {
    ("A", "B"): MotifKind.INTER_DIFFUSION_A2B,
    ("B", "A"): MotifKind.INTER_DIFFUSION_B2A,
    ("A", "A"): MotifKind.CIRCULAR_A,
    ("B", "B"): MotifKind.CIRCULAR_B,
}


@dataclass(frozen=True)
class MotifInstance:
    pivot: str
    edges: tuple[Edge, ...]
    kind: MotifKind

    def __lt__(self, other):
        return (self.pivot, self.edges, self.kind.value) < (other.pivot, other.edges, other.kind.value)


@dataclass(frozen=True)
class MotifCensus:
    instances: tuple[MotifInstance, ...]

    @property
    def total(self) -> int:
        return len(self.instances)

    @property
    def counts(self) -> Mapping[MotifKind, int]:
        c = Counter(i.kind for i in self.instances)
        return {k: c.get(k, 0) for k in MotifKind}

    @property
    def shares(self) -> Mapping[MotifKind, float]:
        total = self.total
        return {k: (n / total if total else 0.0) for k, n in self.counts.items()}

    @property
    def participation(self) -> Mapping[str, frozenset[MotifKind]]:
        out: dict[str, set[MotifKind]] = {}
        for i in self.instances:
            out.setdefault(i.pivot, set()).add(i.kind)
        return {p: frozenset(ks) for p, ks in sorted(out.items())}

    def group_instances(self, group: MotifGroup) -> list[MotifInstance]:
        return [i for i in self.instances if i.kind.group is group]


def census(merged: CitationGraph) -> MotifCensus:
    if merged.scope_label != MERGED:
        raise ScopeError(f"census needs a MERGED graph, got {merged.scope_label}")
    side = {d: n.side for d, n in merged.nodes.items()}
    found: list[MotifInstance] = []
    for p in sorted(merged.boundary_nodes()):
        ins = sorted(x for x in merged.predecessors[p] if side[x] != "boundary")
        outs = sorted(y for y in merged.successors[p] if side[y] != "boundary")

        for x, y in product(ins, outs):
            found.append(MotifInstance(p, ((x, p), (p, y)), _CHAIN_KIND[side[x], side[y]]))

        out_a = [y for y in outs if side[y] == "A"]
        out_b = [y for y in outs if side[y] == "B"]
        for ya, yb in product(out_a, out_b):
            found.append(MotifInstance(p, ((p, ya), (p, yb)), MotifKind.CROSS_FERTILIZATION))

        in_a = [x for x in ins if side[x] == "A"]
        in_b = [x for x in ins if side[x] == "B"]
        for xa, xb in product(in_a, in_b):
            found.append(MotifInstance(p, ((xa, p), (xb, p)), MotifKind.BOUNDARY_TRIGGERED))

        for q in sorted(merged.successors[p]):
            if side[q] == "boundary":
                found.append(MotifInstance(p, ((p, q),), MotifKind.INTERDISCIPLINARY_EMERGENCE))
    return MotifCensus(tuple(sorted(found)))


def as_group(kind) -> MotifGroup:
    if isinstance(kind, MotifGroup):
        return kind
    if isinstance(kind, MotifKind):
        return kind.group
    for g in MotifGroup:
        if kind in (g.value, g.name):
            return g
    raise UnknownKind(f"unknown motif group {kind!r}")


def motif_subnetwork(c: MotifCensus, kind, merged: CitationGraph) -> CitationGraph:
    group = as_group(kind)
    edges = {e for i in c.group_instances(group) for e in i.edges}
    return merged.edge_subgraph(edges)


def participation_summary(c: MotifCensus) -> Mapping[MotifGroup, int]:
    pivots = {g: set() for g in MotifGroup}
    for i in c.instances:
        pivots[i.kind.group].add(i.pivot)
    return {g: len(ps) for g, ps in pivots.items()}


# --- CSV -----------------------------------------------------------------

CENSUS_HEADER = ["pivot", "kind", "in_src", "in_dst", "out_src", "out_dst"]


def census_rows(c: MotifCensus) -> Iterable[list[str]]:
    for i in c.instances:
        first = i.edges[0]
        second = i.edges[1] if len(i.edges) > 1 else ("", "")
        yield [i.pivot, i.kind.value, *first, *second]


def write_census_csv(c: MotifCensus, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CENSUS_HEADER)
        w.writerows(census_rows(c))


def read_census_csv(path: str | Path) -> MotifCensus:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        edges = [(r["in_src"], r["in_dst"])]
        if r["out_src"]:
            edges.append((r["out_src"], r["out_dst"]))
        out.append(MotifInstance(r["pivot"], tuple(edges), MotifKind(r["kind"])))
    return MotifCensus(tuple(sorted(out)))
