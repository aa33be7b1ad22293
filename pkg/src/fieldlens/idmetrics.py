"""Boundary-paper and cross-citation interdisciplinarity scalars.

Knowledge is taken to flow from the cited paper to the citing one, so the
outflow from field A to field B counts citations *made by* B papers *to* A papers.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .citegraph import FIELD_A, FIELD_B, MERGED, CitationGraph
from .errors import DegenerateMerged, ScopeError


@dataclass(frozen=True)
class IdMetricsReport:
    n_k1: int
    nc_k1: int
    idp: float
    m1: int
    m2: int
    mb: int
    mc: int
    m_cross: int
    idl: float
    dominance: float | None  # math.inf when IDl == 0 < IDp; None when both are 0
    overall_strength: float
    outflow_a_to_b: int
    outflow_b_to_a: int
    linkage_a_to_b: float | None
    linkage_b_to_a: float | None

    def to_json(self) -> dict:
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, float) and math.isinf(v):
                out[k] = "inf"
        return out

    @classmethod
    def from_json(cls, obj: dict) -> IdMetricsReport:
        obj = dict(obj)
        for k, v in obj.items():
            if v == "inf":
                obj[k] = math.inf
        return cls(**obj)


def _require_merged(g: CitationGraph) -> None:
    if g.scope_label != MERGED:
        raise ScopeError(f"expected a MERGED graph, got {g.scope_label}")


def _field_pair(a: CitationGraph, b: CitationGraph) -> tuple[CitationGraph, CitationGraph]:
    if {a.scope_label, b.scope_label} != {FIELD_A, FIELD_B}:
        raise ScopeError(f"expected one FIELD_A and one FIELD_B graph, got {a.scope_label}/{b.scope_label}")
    return (a, b) if a.scope_label == FIELD_A else (b, a)


def boundary_set(merged: CitationGraph) -> set[str]:
    _require_merged(merged)
    return merged.boundary_nodes()


def cross_edges(a: CitationGraph, b: CitationGraph, merged: CitationGraph) -> set[tuple[str, str]]:
    """Merged citations present in neither field graph."""
    return set(merged.edges - (a.edges | b.edges))


def outflows(a: CitationGraph, b: CitationGraph, merged: CitationGraph,
             include_boundary: bool = False) -> tuple[int, int]:
    """(outflow A->B, outflow B->A) counted over cross edges.

    By default only edges between field-exclusive papers count. With
    ``include_boundary`` a boundary endpoint stands for the field opposite to
    its exclusive partner; boundary-to-boundary edges never count.
    """
    a, b = _field_pair(a, b)
    _require_merged(merged)
    a_to_b = b_to_a = 0
    for citing, cited in cross_edges(a, b, merged):
        s, t = merged.nodes[citing].side, merged.nodes[cited].side
        if not include_boundary and "boundary" in (s, t):
            continue
        if s == t:
            continue
        if t == "boundary":
            t = "B" if s == "A" else "A"
        elif s == "boundary":
            s = "B" if t == "A" else "A"
        if t == "A" and s == "B":
            a_to_b += 1
        elif t == "B" and s == "A":
            b_to_a += 1
    return a_to_b, b_to_a


def linkage_factors(a: CitationGraph, b: CitationGraph, merged: CitationGraph,
                    include_boundary: bool = False) -> tuple[float | None, float | None]:
    ab, ba = outflows(a, b, merged, include_boundary)
    return (ab / ba if ba else None), (ba / ab if ab else None)


def dominance(idp: float, idl: float) -> float | None:
    if idl > 0:
        return idp / idl
    return math.inf if idp > 0 else None


def compute_metrics(a: CitationGraph, b: CitationGraph, merged: CitationGraph,
                    include_boundary: bool = False) -> IdMetricsReport:
    a, b = _field_pair(a, b)
    _require_merged(merged)
    mc = merged.n_edges
    if mc == 0:
        raise DegenerateMerged("merged graph has no citations")

    cited_or_citing = [d for d in merged.nodes if merged.degree(d) >= 1]
    bd = merged.boundary_nodes()
    n_k1 = sum(1 for d in cited_or_citing if d in bd)
    nc_k1 = len(cited_or_citing)
    idp = n_k1 / nc_k1

    m1, m2 = a.n_edges, b.n_edges
    mb = len(a.edges & b.edges)
    m_cross = mc - (m1 + m2 - mb)
    idl = m_cross / mc

    ab, ba = outflows(a, b, merged, include_boundary)
    d = dominance(idp, idl)
    return IdMetricsReport(
        n_k1=n_k1, nc_k1=nc_k1, idp=idp,
        m1=m1, m2=m2, mb=mb, mc=mc, m_cross=m_cross, idl=idl,
        dominance=d,
        overall_strength=idp + idl,
        outflow_a_to_b=ab, outflow_b_to_a=ba,
        linkage_a_to_b=ab / ba if ba else None,
        linkage_b_to_a=ba / ab if ab else None,
    )
