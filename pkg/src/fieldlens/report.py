"""Stable, diffable tables and graph files for every analysis product.

Layout under the output directory::

    tables/*.md, tables/*.csv, graphs/*.graphml, manifest.json

Number formats are fixed per table family so reruns diff cleanly: ratios use
two decimals, degree statistics one, centrality scores six.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import citegraph, socionet
from .citegraph import CitationGraph, DegreeStats
from .communities import ComponentReport, Partition
from .errors import IoError
from .idmetrics import IdMetricsReport
from .motifs import MotifCensus, MotifGroup, MotifKind
from .socionet import CentralityTable, SocioNetwork
from .topics import TopicLabel


def ratio(x: float | None) -> str:
    if x is None:
        return ""
    if math.isinf(x):
        return "inf"
    return f"{x:.2f}"


def stat(x: float) -> str:
    return f"{x:.1f}"


def score(x: float) -> str:
    return f"{x:.6f}"


def md_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    def cell(v):
        return str(v).replace("|", "\\|")
    lines = ["| " + " | ".join(map(cell, header)) + " |",
             "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(map(cell, r)) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


@dataclass
class CommunityProduct:
    graph: CitationGraph
    partition: Partition | None
    components: ComponentReport
    labels: Sequence[TopicLabel] = ()


@dataclass
class SocioProduct:
    network: SocioNetwork
    main: SocioNetwork
    component_sizes: Sequence[tuple[int, int]]
    tables: Mapping[str, CentralityTable]
    classes: Partition | None = None  # modularity classes of the main component


@dataclass
class ReportProducts:
    field_a_label: str
    field_b_label: str
    graphs: Mapping[str, CitationGraph]
    degree_stats: Mapping[str, DegreeStats]
    id_metrics: IdMetricsReport
    census: MotifCensus
    participation: Mapping[MotifGroup, int]
    communities: Mapping[MotifGroup, CommunityProduct] = field(default_factory=dict)
    socio: Mapping[str, SocioProduct] = field(default_factory=dict)
    outlets: Sequence[tuple[str, str, int]] = ()


@dataclass(frozen=True)
class ReportBundle:
    out_dir: Path
    manifest: Mapping[str, Mapping[str, str]]


STRUCTURE = {
    MotifKind.INTER_DIFFUSION_A2B: "A -> boundary -> B",
    MotifKind.INTER_DIFFUSION_B2A: "B -> boundary -> A",
    MotifKind.CIRCULAR_A: "A -> boundary -> A",
    MotifKind.CIRCULAR_B: "B -> boundary -> B",
    MotifKind.CROSS_FERTILIZATION: "A <- boundary -> B",
    MotifKind.BOUNDARY_TRIGGERED: "A -> boundary <- B",
    MotifKind.INTERDISCIPLINARY_EMERGENCE: "boundary -> boundary",
}

NETWORK_TITLES = {"field_a": None, "field_b": None, "boundary": "Boundary papers", "merged": "Merged network"}


class _Writer:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: dict[str, str] = {}

    def text(self, rel: str, content: str) -> None:
        path = self.out_dir / rel
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(content.encode("utf-8"))
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
        self.written[rel] = hashlib.sha256(content.encode("utf-8")).hexdigest()

    def table(self, stem: str, header, rows, md_header=None, md_rows=None) -> None:
        self.text(f"tables/{stem}.csv", csv_text(header, rows))
        self.text(f"tables/{stem}.md", md_table(md_header or header, rows if md_rows is None else md_rows))

    def file(self, rel: str, writer) -> None:
        path = self.out_dir / rel
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            writer(path)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
        self.written[rel] = hashlib.sha256(path.read_bytes()).hexdigest()


def id_metric_rows(m: IdMetricsReport, a: str, b: str) -> list[list[str]]:
    return [
        ["IDp", ratio(m.idp)],
        ["IDl", ratio(m.idl)],
        ["D", ratio(m.dominance)],
        ["overall_strength", ratio(m.overall_strength)],
        [f"linkage_{a}_to_{b}", ratio(m.linkage_a_to_b)],
        [f"linkage_{b}_to_{a}", ratio(m.linkage_b_to_a)],
        ["n_k1", str(m.n_k1)],
        ["nc_k1", str(m.nc_k1)],
        ["m1", str(m.m1)],
        ["m2", str(m.m2)],
        ["mb", str(m.mb)],
        ["mc", str(m.mc)],
        ["m_cross", str(m.m_cross)],
        [f"outflow_{a}_to_{b}", str(m.outflow_a_to_b)],
        [f"outflow_{b}_to_{a}", str(m.outflow_b_to_a)],
    ]


def _degree_tables(w: _Writer, p: ReportProducts) -> None:
    titles = dict(NETWORK_TITLES, field_a=p.field_a_label, field_b=p.field_b_label)
    rows = []
    for name in ("field_a", "field_b", "boundary", "merged"):
        ds = p.degree_stats.get(name)
        if ds is None:
            continue
        for measure, s in (("outdegree", ds.outdegree), ("indegree", ds.indegree)):
            rows.append([titles[name], measure, stat(s.mean), stat(s.median), f"{s.mode:.0f}",
                         f"{s.min:.0f}", f"{s.max:.0f}", stat(s.stddev), str(ds.n_nodes), str(ds.n_edges)])
    w.table("degree_stats",
            ["network", "measure", "mean", "median", "mode", "min", "max", "stddev", "nodes", "edges"], rows)


def _id_tables(w: _Writer, p: ReportProducts) -> None:
    m, a, b = p.id_metrics, p.field_a_label, p.field_b_label
    w.text("tables/id_metrics.csv", csv_text(["measure", "value"], id_metric_rows(m, a, b)))
    mutual = f"{a} -> {b}: {ratio(m.linkage_a_to_b) or 'undefined'}; {b} -> {a}: {ratio(m.linkage_b_to_a) or 'undefined'}"
    w.text("tables/id_metrics.md", md_table(["Measure", "Value"], [
        ["Strength through boundary papers (IDp)", ratio(m.idp)],
        ["Strength through cross-disciplinary arcs (IDl)", ratio(m.idl)],
        ["Dominant mode of interaction (D)", ratio(m.dominance) or "undefined"],
        ["Overall strength of interaction", ratio(m.overall_strength)],
        ["Mutual contribution between fields", mutual],
    ]))


def _motif_tables(w: _Writer, p: ReportProducts) -> None:
    c = p.census
    counts, shares = c.counts, c.shares
    rows = []
    if c.total:
        rows = [[k.group.value, k.value, STRUCTURE[k], str(counts[k]), ratio(shares[k])] for k in MotifKind]
    w.table("motif_shares", ["mode", "kind", "structure", "instances", "share"], rows)
    w.table("participation", ["mode", "boundary_papers"],
            [[g.value, str(p.participation.get(g, 0))] for g in MotifGroup])


def _community_tables(w: _Writer, p: ReportProducts) -> None:
    summary, topics = [], []
    for g in MotifGroup:
        cp = p.communities.get(g)
        if cp is None:
            continue
        part = cp.partition
        summary.append([g.value, str(len(cp.graph)), str(cp.graph.n_edges), str(cp.components.component_count),
                        str(part.n_communities if part else 0), ratio(part.modularity) if part else ""])
        labels = {l.community_id: l for l in cp.labels}
        if part is not None:
            for cid, members in part.members().items():
                lab = labels.get(cid)
                topics.append([g.value, str(cid), str(len(members)),
                               lab.description if lab else "", (lab.normalized or lab.description) if lab else ""])
        w.file(f"graphs/motif_{g.value}.graphml", lambda path, gr=cp.graph: citegraph.write_graphml(gr, path))
    w.table("communities", ["mode", "nodes", "edges", "components", "communities", "modularity"], summary)
    w.table("topics", ["mode", "community", "papers", "label", "normalized"], topics)


def _socio_tables(w: _Writer, p: ReportProducts) -> None:
    summary = []
    for kind, sp in sorted(p.socio.items()):
        summary.append([kind, str(len(sp.network.nodes)), str(len(sp.network.edges)), str(len(sp.component_sizes)),
                        str(len(sp.main.nodes)), str(len(sp.main.edges))])
        top_rows = []
        for measure in socionet.MEASURES:
            table = sp.tables[measure]
            w.table(f"centrality_{kind}_{measure}", ["node", "score"],
                    [[n, score(s)] for n, s in table.ranking()],
                    md_header=["node", "label", "score"],
                    md_rows=[[n, sp.main.nodes[n], score(s)] for n, s in table.ranking()])
            top_rows.append([measure] + [sp.main.nodes[n] for n, _ in table.top])
        k = max((len(r) - 1 for r in top_rows), default=0)
        header = ["measure"] + [f"node_{i}" for i in range(1, k + 1)]
        top_rows = [r + [""] * (k + 1 - len(r)) for r in top_rows]
        w.table(f"centrality_{kind}_top", header, top_rows)
        if sp.classes is not None:
            w.table(f"modularity_classes_{kind}", ["node", "label", "class"],
                    [[n, sp.main.nodes[n], str(c)] for n, c in sorted(sp.classes.assignment.items())])
        w.file(f"graphs/{kind}.graphml", lambda path, n=sp.network: socionet.write_graphml(n, path))
        w.file(f"graphs/{kind}_main.graphml", lambda path, n=sp.main: socionet.write_graphml(n, path))
    w.table("socionet", ["network", "nodes", "edges", "components", "main_nodes", "main_edges"], summary)
    if p.outlets:
        w.table("outlets", ["venue", "kind", "boundary_papers"], [[v, k, str(n)] for v, k, n in p.outlets])


def render(products: ReportProducts, out_dir: str | Path) -> ReportBundle:
    out_dir = Path(out_dir)
    w = _Writer(out_dir)
    _degree_tables(w, products)
    _id_tables(w, products)
    _motif_tables(w, products)
    _community_tables(w, products)
    _socio_tables(w, products)
    for name, g in sorted(products.graphs.items()):
        w.file(f"graphs/{name}.graphml", lambda path, g=g: citegraph.write_graphml(g, path))
    if "merged" in products.graphs:
        w.file("graphs/merged_edges.csv", lambda path: citegraph.write_edge_list(products.graphs["merged"], path))

    manifest = {rel: {"path": rel, "sha256": h} for rel, h in sorted(w.written.items())}
    try:
        (out_dir / "manifest.json").write_text(
            json.dumps({"artifacts": manifest}, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write manifest: {exc}") from exc
    return ReportBundle(out_dir, manifest)


def read_csv_table(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
