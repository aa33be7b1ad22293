"""Pipeline configuration and the stages the CLI drives.

Stages communicate only through files under ``<out>/work/`` so that running
``all`` and running the stages one by one produce the same bytes.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
import logging
import shlex
import subprocess
import sys
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import citegraph, communities, corpus, harvest, idmetrics, motifs, report, socionet, topics
from .citegraph import FIELD_A, FIELD_B
from .errors import LabelerFailed, MissingArtifact, MissingMetadata, NoLabelsFound, ValidationError
from .motifs import MotifGroup

log = logging.getLogger(__name__)

PRUNE_CHOICES = ("fixpoint", "single_pass", "none")


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {value!r}")


@dataclass
class PipelineConfig:
    seed: int
    inputs: tuple[Path, ...] = ()
    out: Path = Path("fieldlens-out")
    field_a_label: str = "BE"
    field_b_label: str = "CS"
    input_format: str | None = None
    filters: Path | None = None
    prune: str = "fixpoint"
    prune_stage: str = "fields"
    nonzero_only: bool = True
    linkage_include_boundary: bool = False
    resolution: float = 1.0
    venue_rules: Path | None = None
    paths_use_weights: bool = False
    socionet_scope: str = "boundary"
    top_k: int = 5
    prompt_template: Path | None = None
    labeler_command: str | None = None
    labels_dir: Path | None = None
    label_map: Path | None = None
    harvest_source: str = "source1"
    harvest_queries: Path | None = None
    harvest_cache: Path = Path(".fieldlens-cache")
    harvest_base_url: str | None = None
    harvest_page_size: int = 25
    harvest_references: bool = True
    base_dir: Path = field(default=Path("."), compare=False)

    PATH_KEYS = ("filters", "venue_rules", "prompt_template", "labels_dir", "label_map",
                 "harvest_queries", "harvest_cache", "out")

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict | None = None) -> PipelineConfig:
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        if not text.lstrip().startswith("["):
            text = "[fieldlens]\n" + text
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ValidationError(f"cannot parse {path}: {exc}") from exc
        raw = {}
        for section in parser.sections():
            raw.update(parser[section])
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_mapping(raw, path.parent.resolve())

    @classmethod
    def from_mapping(cls, raw: dict, base_dir: Path) -> PipelineConfig:
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {"base_dir": base_dir}
        for key, value in raw.items():
            key = key.strip().lower()
            if key == "input":
                key = "inputs"
            if key not in known or key == "base_dir":
                raise ValidationError(f"unknown config key: {key}")
            if not isinstance(value, str):
                kwargs[key] = value
                continue
            value = value.strip()
            if key == "inputs":
                kwargs[key] = tuple(cls._path(base_dir, v) for v in value.split(",") if v.strip())
            elif key in cls.PATH_KEYS:
                kwargs[key] = cls._path(base_dir, value) if value else None
            elif key in ("seed", "top_k", "harvest_page_size"):
                try:
                    kwargs[key] = int(value)
                except ValueError:
                    raise ValidationError(f"{key} must be an integer, got {value!r}") from None
            elif key == "resolution":
                kwargs[key] = float(value)
            elif key in ("nonzero_only", "linkage_include_boundary", "paths_use_weights", "harvest_references"):
                kwargs[key] = _bool(value)
            else:
                kwargs[key] = value or None
        if "seed" not in kwargs:
            raise ValidationError("config must set an explicit integer 'seed'")
        if kwargs.get("out") is None:
            kwargs.pop("out", None)
        cfg = cls(**kwargs)
        cfg.check_choices()
        return cfg

    @staticmethod
    def _path(base: Path, value: str) -> Path:
        p = Path(value.strip()).expanduser()
        return p if p.is_absolute() else base / p

    def check_choices(self) -> None:
        if self.prune not in PRUNE_CHOICES:
            raise ValidationError(f"prune must be one of {PRUNE_CHOICES}")
        if self.prune_stage not in ("fields", "merged"):
            raise ValidationError("prune_stage must be 'fields' or 'merged'")
        if self.socionet_scope not in ("boundary", "all"):
            raise ValidationError("socionet_scope must be 'boundary' or 'all'")
        if self.field_a_label == self.field_b_label:
            raise ValidationError("field labels must differ")

    def require_paths(self, *names: str) -> None:
        for name in names:
            value = getattr(self, name)
            for p in value if isinstance(value, tuple) else (value,):
                if p is not None and not Path(p).exists():
                    raise ValidationError(f"{name}: path does not exist: {p}")
        if "inputs" in names and not self.inputs:
            raise ValidationError("config must name at least one 'input' corpus file")

    def validate(self) -> None:
        self.require_paths("inputs", "filters", "venue_rules", "prompt_template", "labels_dir", "label_map")

    # artifact locations
    @property
    def work(self) -> Path:
        return self.out / "work"

    def artifact(self, rel: str, must_exist: bool = True) -> Path:
        p = self.work / rel
        if must_exist and not p.exists():
            raise MissingArtifact(p)
        return p


GRAPH_NAMES = ("field_a", "field_b", "merged")


# --- stages --------------------------------------------------------------

def stage_harvest(cfg: PipelineConfig, out_path: Path | None = None, session_kwargs: dict | None = None) -> str:
    if cfg.harvest_queries is None:
        raise ValidationError("harvest needs 'harvest_queries' (JSON list of query specs)")
    cfg.require_paths("harvest_queries")
    specs = [harvest.QuerySpec.from_json(o) for o in json.loads(cfg.harvest_queries.read_text(encoding="utf-8"))]
    for q in specs:
        if q.target_field_label not in (cfg.field_a_label, cfg.field_b_label):
            raise ValidationError(f"query targets unknown field label {q.target_field_label!r}")
    session = harvest.HarvestSession(cfg.harvest_source, cfg.harvest_cache, cfg.harvest_page_size,
                                     cfg.harvest_base_url, **(session_kwargs or {}))
    text = harvest.to_jsonl(harvest.harvest(specs, session, with_references=cfg.harvest_references))
    if out_path is not None:
        Path(out_path).write_text(text, encoding="utf-8")
    log.info("harvested %d record(s) with %d network call(s)", session.retrieved, session.network_calls)
    return text


def stage_ingest(cfg: PipelineConfig) -> corpus.Corpus:
    cfg.require_paths("inputs", "filters")
    merged = None
    for path in cfg.inputs:
        c = corpus.read_corpus(path, cfg.input_format, cfg.field_a_label, cfg.field_b_label)
        merged = c if merged is None else corpus.merge_corpora(merged, c)
    filter_log = []
    if cfg.filters is not None:
        merged, filter_log = corpus.apply_filters(merged, corpus.load_filters(cfg.filters))
    cfg.work.mkdir(parents=True, exist_ok=True)
    merged.write_jsonl(cfg.work / "corpus.jsonl")
    (cfg.work / "filter_log.csv").write_text(report.csv_text(["doi", "filter"], filter_log), encoding="utf-8")
    log.info("corpus: %d papers (%d rejected by filters, %d without DOI)", len(merged), len(filter_log), merged.dropped)
    return merged


def load_corpus(cfg: PipelineConfig) -> corpus.Corpus:
    return corpus.read_corpus(cfg.artifact("corpus.jsonl"), "jsonl", cfg.field_a_label, cfg.field_b_label)


def build_graphs(c: corpus.Corpus, prune: str, prune_stage: str):
    a = citegraph.build_graph(c, FIELD_A)
    b = citegraph.build_graph(c, FIELD_B)
    if prune != "none" and prune_stage == "fields":
        a, b = citegraph.prune_leaves(a, prune), citegraph.prune_leaves(b, prune)
    merged = citegraph.merge_graphs(a, b, c)
    if prune != "none" and prune_stage == "merged":
        merged = citegraph.prune_leaves(merged, prune)
        a, b = a.induced(merged.nodes), b.induced(merged.nodes)
        # membership flags follow the restricted field graphs
        merged = citegraph.merge_graphs(a, b, c).induced(merged.nodes)
    return a, b, merged


def stage_graph(cfg: PipelineConfig):
    c = load_corpus(cfg)
    a, b, merged = build_graphs(c, cfg.prune, cfg.prune_stage)
    gdir = cfg.work / "graphs"
    for name, g in zip(GRAPH_NAMES, (a, b, merged)):
        citegraph.write_graphml(g, gdir / f"{name}.graphml")
    citegraph.write_edge_list(merged, gdir / "merged_edges.csv")
    return a, b, merged


def load_graphs(cfg: PipelineConfig):
    return tuple(citegraph.read_graphml(cfg.artifact(f"graphs/{n}.graphml")) for n in GRAPH_NAMES)


def _stats_json(ds: citegraph.DegreeStats) -> dict:
    return dataclasses.asdict(ds)


def _stats_from_json(obj: dict) -> citegraph.DegreeStats:
    return citegraph.DegreeStats(citegraph.Summary(**obj["outdegree"]), citegraph.Summary(**obj["indegree"]),
                                 obj["n_nodes"], obj["n_edges"])


def stage_metrics(cfg: PipelineConfig) -> idmetrics.IdMetricsReport:
    a, b, merged = load_graphs(cfg)
    m = idmetrics.compute_metrics(a, b, merged, cfg.linkage_include_boundary)
    stats = {}
    for name, g in (("field_a", a), ("field_b", b), ("boundary", citegraph.boundary_subgraph(merged)),
                    ("merged", merged)):
        try:
            stats[name] = _stats_json(citegraph.degree_stats(g, cfg.nonzero_only))
        except citegraph.EmptyGraph:
            log.warning("%s network is empty; no degree statistics", name)
    _dump(cfg.work / "metrics.json", {"id_metrics": m.to_json(), "degree_stats": stats})
    return m


def _dump(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def stage_motifs(cfg: PipelineConfig) -> motifs.MotifCensus:
    _, _, merged = load_graphs(cfg)
    c = motifs.census(merged)
    motifs.write_census_csv(c, cfg.work / "census.csv")
    return c


def stage_communities(cfg: PipelineConfig) -> None:
    _, _, merged = load_graphs(cfg)
    c = motifs.read_census_csv(cfg.artifact("census.csv"))
    cdir = cfg.work / "communities"
    cdir.mkdir(parents=True, exist_ok=True)
    for g in MotifGroup:
        sub = motifs.motif_subnetwork(c, g, merged)
        citegraph.write_graphml(sub, cdir / f"{g.value}.graphml")
        part = (communities.louvain(sub, cfg.resolution, cfg.seed) if len(sub)
                else communities.Partition({}, 0.0, cfg.seed, cfg.resolution))
        communities.write_partition(part, cdir / f"{g.value}.csv", cdir / f"{g.value}.json")


def _labeler_argv(command: str) -> list[str]:
    argv = shlex.split(command)
    if argv and argv[0] in ("python", "python3"):
        argv[0] = sys.executable
    return argv


def stage_topics_bundle(cfg: PipelineConfig) -> None:
    cfg.require_paths("prompt_template")
    c = load_corpus(cfg)
    header = cfg.prompt_template.read_text(encoding="utf-8") if cfg.prompt_template else None
    tdir = cfg.work / "topics"
    tdir.mkdir(parents=True, exist_ok=True)
    for g in MotifGroup:
        part = communities.read_partition(cfg.artifact(f"communities/{g.value}.csv"))
        bundles = topics.build_bundles(part, c)
        (tdir / f"{g.value}.bundle.txt").write_text(topics.render_bundle_file(bundles, header), encoding="utf-8")


def stage_topics_apply(cfg: PipelineConfig) -> None:
    cfg.require_paths("labels_dir", "label_map")
    tdir = cfg.work / "topics"
    result = {}
    for g in MotifGroup:
        bundle_path = cfg.artifact(f"topics/{g.value}.bundle.txt")
        part = communities.read_partition(cfg.artifact(f"communities/{g.value}.csv"))
        if not part.assignment:
            result[g.value] = []
            continue
        response = None
        given = cfg.labels_dir / f"{g.value}.txt" if cfg.labels_dir else None
        if given is not None and given.exists():
            response = given.read_text(encoding="utf-8")
        elif cfg.labeler_command:
            try:
                proc = subprocess.run(_labeler_argv(cfg.labeler_command), input=bundle_path.read_text(encoding="utf-8"),
                                      capture_output=True, text=True, check=True)
            except (OSError, subprocess.CalledProcessError) as exc:
                detail = getattr(exc, "stderr", "") or ""
                raise LabelerFailed(f"labeler command failed for {g.value}: {exc} {detail.strip()}".strip()) from None
            response = proc.stdout
        if response is None:
            log.warning("no labels for %s (set labels_dir or labeler_command)", g.value)
            result[g.value] = []
            continue
        (tdir / f"{g.value}.response.txt").write_text(response, encoding="utf-8")
        try:
            labels = topics.parse_labels(response)
        except NoLabelsFound as exc:
            raise NoLabelsFound(f"{g.value}: {exc}") from None
        labels = topics.normalize_labels(labels, cfg.label_map)
        result[g.value] = [dataclasses.asdict(l) for l in labels]
    _dump(tdir / "labels.json", result)


def stage_socionet(cfg: PipelineConfig) -> None:
    cfg.require_paths("venue_rules")
    c = load_corpus(cfg)
    _, _, merged = load_graphs(cfg)
    if cfg.socionet_scope == "boundary":
        c = c.subset(idmetrics.boundary_set(merged))
    rule = socionet.VenueAggregationRule.load(cfg.venue_rules) if cfg.venue_rules else socionet.VenueAggregationRule()
    c = socionet.aggregate_venues(c, rule)
    sdir = cfg.work / "socionet"
    sdir.mkdir(parents=True, exist_ok=True)
    outlets = Counter((p.venue.name, p.venue.kind) for p in c if p.venue is not None)
    _dump(sdir / "outlets.json", [[v, k, n] for (v, k), n in sorted(outlets.items(), key=lambda kv: (-kv[1], kv[0]))])
    for kind in ("venue", "author"):
        try:
            net = socionet.build_socionet(c, kind)
        except MissingMetadata as exc:
            log.warning("%s network skipped: %s", kind, exc)
            net = socionet.SocioNetwork(kind, {}, {})
        socionet.write_graphml(net, sdir / f"{kind}.graphml")
        socionet.write_provenance(net, sdir / f"{kind}_edges.csv")


def _load_socio(cfg: PipelineConfig) -> dict[str, report.SocioProduct]:
    out = {}
    for kind in ("venue", "author"):
        net = socionet.read_network(cfg.artifact(f"socionet/{kind}.graphml"), cfg.artifact(f"socionet/{kind}_edges.csv"))
        if not net.nodes:
            continue
        main = socionet.main_component(net)
        tables = {m: socionet.centrality(main, m, cfg.top_k, cfg.paths_use_weights) for m in socionet.MEASURES}
        sizes = [(len(comp), len(net.subnetwork(comp).edges)) for comp in socionet.component_members(net)]
        classes = communities.louvain_weighted(main.nodes, main.edges, cfg.resolution, cfg.seed)
        out[kind] = report.SocioProduct(net, main, sizes, tables, classes)
    return out


def stage_report(cfg: PipelineConfig) -> report.ReportBundle:
    a, b, merged = load_graphs(cfg)
    metrics = json.loads(cfg.artifact("metrics.json").read_text(encoding="utf-8"))
    census = motifs.read_census_csv(cfg.artifact("census.csv"))
    labels_path = cfg.artifact("topics/labels.json", must_exist=False)
    labels = json.loads(labels_path.read_text(encoding="utf-8")) if labels_path.exists() else {}
    comms = {}
    for g in MotifGroup:
        sub = citegraph.read_graphml(cfg.artifact(f"communities/{g.value}.graphml"))
        part = communities.read_partition(cfg.artifact(f"communities/{g.value}.csv"),
                                          cfg.artifact(f"communities/{g.value}.json"))
        comms[g] = report.CommunityProduct(
            sub, part if part.assignment else None, communities.components(sub),
            [topics.TopicLabel(**l) for l in labels.get(g.value, [])])
    products = report.ReportProducts(
        field_a_label=cfg.field_a_label,
        field_b_label=cfg.field_b_label,
        graphs=dict(zip(GRAPH_NAMES, (a, b, merged))),
        degree_stats={k: _stats_from_json(v) for k, v in metrics["degree_stats"].items()},
        id_metrics=idmetrics.IdMetricsReport.from_json(metrics["id_metrics"]),
        census=census,
        participation=motifs.participation_summary(census),
        communities=comms,
        socio=_load_socio(cfg),
        outlets=[tuple(r) for r in json.loads(cfg.artifact("socionet/outlets.json").read_text(encoding="utf-8"))],
    )
    return report.render(products, cfg.out)


STAGES = {
    "ingest": stage_ingest,
    "graph": stage_graph,
    "metrics": stage_metrics,
    "motifs": stage_motifs,
    "communities": stage_communities,
    "topics bundle": stage_topics_bundle,
    "topics apply": stage_topics_apply,
    "socionet": stage_socionet,
    "report": stage_report,
}


def run_all(cfg: PipelineConfig) -> report.ReportBundle:
    cfg.validate()
    result = None
    for name, fn in STAGES.items():
        log.info("stage: %s", name)
        result = fn(cfg)
    return result
