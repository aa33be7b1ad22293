"""Clean, DOI-keyed bibliographic corpus.

Raw records arrive as JSONL (or a reduced CSV) and are canonicalized by DOI.
Within a single ingest, duplicate DOIs are collapsed and their field labels
and references unioned -- that is how a paper returned by both field queries
becomes a boundary paper. Across sources (:func:`merge_corpora`) the primary
source wins outright.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import EmptyCorpus, LabelMismatch, MalformedInput, UnknownField

log = logging.getLogger(__name__)

_DOI_PREFIXES = (
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "doi:",
)

VENUE_KINDS = ("journal", "conference", "aggregated-proceedings")


def canonical_doi(raw: str | None) -> str:
    """Lowercase, trim and strip resolver prefixes. Returns "" for missing DOIs."""
    if raw is None:
        return ""
    doi = str(raw).strip().lower()
    for prefix in _DOI_PREFIXES:
        if doi.startswith(prefix):
            doi = doi[len(prefix):].strip()
            break
    return doi


@dataclass(frozen=True, order=True)
class AuthorRef:
    author_id: str
    display_name: str = ""

    def __post_init__(self):
        if not self.author_id:
            raise ValueError("author_id must be non-empty")

    def __eq__(self, other):
        return isinstance(other, AuthorRef) and other.author_id == self.author_id

    def __hash__(self):
        return hash(self.author_id)


@dataclass(frozen=True)
class VenueRef:
    venue_id: str
    name: str = ""
    kind: str = "journal"

    def __post_init__(self):
        if not self.venue_id:
            raise ValueError("venue_id must be non-empty")
        if self.kind not in VENUE_KINDS:
            raise ValueError(f"unknown venue kind {self.kind!r}")


@dataclass(frozen=True)
class PaperRecord:
    doi: str
    title: str = ""
    abstract: str | None = None
    year: int | None = None
    authors: tuple[AuthorRef, ...] = ()
    venue: VenueRef | None = None
    fields: frozenset[str] = frozenset()
    references: frozenset[str] = frozenset()
    source: str = ""

    def __post_init__(self):
        if not self.doi:
            raise ValueError("doi must be non-empty")
        if not self.fields:
            raise ValueError(f"{self.doi}: fields must be non-empty")
        if self.doi in self.references:
            object.__setattr__(self, "references", self.references - {self.doi})

    def to_json(self) -> dict:
        return {
            "doi": self.doi,
            "title": self.title,
            "abstract": self.abstract,
            "year": self.year,
            "fields": sorted(self.fields),
            "authors": [{"id": a.author_id, "name": a.display_name} for a in self.authors],
            "venue": None if self.venue is None else {
                "id": self.venue.venue_id, "name": self.venue.name, "kind": self.venue.kind,
            },
            "references": sorted(self.references),
            "source": self.source,
        }


PAPER_FIELD_NAMES = frozenset(f.name for f in dataclasses.fields(PaperRecord))


@dataclass(frozen=True)
class Corpus:
    papers: Mapping[str, PaperRecord]
    field_a_label: str = "BE"
    field_b_label: str = "CS"
    dropped: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.field_a_label == self.field_b_label:
            raise ValueError("the two field labels must differ")
        labels = self.labels
        for doi, paper in self.papers.items():
            if doi != paper.doi:
                raise ValueError(f"corpus key {doi!r} does not match record doi {paper.doi!r}")
            if not paper.fields <= labels:
                raise ValueError(f"{doi}: field labels {sorted(paper.fields)} not in {sorted(labels)}")
        object.__setattr__(self, "papers", MappingProxyType(dict(sorted(self.papers.items()))))

    @property
    def labels(self) -> frozenset[str]:
        return frozenset((self.field_a_label, self.field_b_label))

    def __len__(self):
        return len(self.papers)

    def __iter__(self):
        return iter(self.papers.values())

    def __contains__(self, doi):
        return doi in self.papers

    def get(self, doi, default=None):
        return self.papers.get(doi, default)

    def in_field(self, label: str) -> list[PaperRecord]:
        return [p for p in self.papers.values() if label in p.fields]

    def dual_tagged(self) -> set[str]:
        return {p.doi for p in self.papers.values() if p.fields == self.labels}

    def subset(self, dois: Iterable[str]) -> Corpus:
        keep = set(dois)
        return self.replace_papers({d: p for d, p in self.papers.items() if d in keep})

    def replace_papers(self, papers: Mapping[str, PaperRecord]) -> Corpus:
        return Corpus(papers, self.field_a_label, self.field_b_label, self.dropped)

    def to_jsonl_lines(self) -> list[str]:
        return [json.dumps(p.to_json(), ensure_ascii=False, sort_keys=True) for p in self]

    def write_jsonl(self, path: str | Path) -> None:
        Path(path).write_text("".join(line + "\n" for line in self.to_jsonl_lines()), encoding="utf-8")


def _author(obj) -> AuthorRef:
    if isinstance(obj, str):
        return AuthorRef(obj, obj)
    return AuthorRef(str(obj["id"]), str(obj.get("name") or ""))


def _venue(obj) -> VenueRef | None:
    if not obj:
        return None
    return VenueRef(str(obj["id"]), str(obj.get("name") or ""), obj.get("kind") or "journal")


def _record_from_json(obj: dict, labels: frozenset[str], line_no: int) -> PaperRecord | None:
    doi = canonical_doi(obj.get("doi"))
    if not doi:
        return None
    fields = frozenset(str(f).strip() for f in obj.get("fields") or () if str(f).strip())
    if not fields:
        raise MalformedInput(line_no, "record has no field labels")
    if not fields <= labels:
        raise MalformedInput(line_no, f"unknown field label(s) {sorted(fields - labels)}")
    refs = frozenset(r for r in (canonical_doi(x) for x in obj.get("references") or ()) if r)
    year = obj.get("year")
    try:
        return PaperRecord(
            doi=doi,
            title=str(obj.get("title") or ""),
            abstract=obj.get("abstract") or None,
            year=None if year in (None, "") else int(year),
            authors=tuple(_author(a) for a in obj.get("authors") or ()),
            venue=_venue(obj.get("venue")),
            fields=fields,
            references=refs,
            source=str(obj.get("source") or ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(line_no, str(exc)) from exc


def _split(cell: str | None) -> list[str]:
    return [x.strip() for x in (cell or "").split(";") if x.strip()]


def _iter_objects(stream: Iterable[str], fmt: str):
    if fmt == "jsonl":
        for line_no, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedInput(line_no, exc.msg) from exc
            if not isinstance(obj, dict):
                raise MalformedInput(line_no, "expected a JSON object")
            yield line_no, obj
    elif fmt == "csv":
        reader = csv.DictReader(stream)
        required = {"doi", "title", "year", "fields", "references"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise MalformedInput(1, f"CSV header must contain {sorted(required)}")
        for row in reader:
            if None in row:
                raise MalformedInput(reader.line_num, "too many columns")
            yield reader.line_num, {
                "doi": row["doi"],
                "title": row["title"],
                "year": row["year"] or None,
                "fields": _split(row["fields"]),
                "references": _split(row["references"]),
                "source": row.get("source") or "csv",
            }
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _union(a: PaperRecord, b: PaperRecord) -> PaperRecord:
    return dataclasses.replace(a, fields=a.fields | b.fields, references=a.references | b.references)


def ingest_records(stream: Iterable[str], format: str = "jsonl",
                   field_a_label: str = "BE", field_b_label: str = "CS") -> Corpus:
    labels = frozenset((field_a_label, field_b_label))
    papers: dict[str, PaperRecord] = {}
    dropped = 0
    for line_no, obj in _iter_objects(stream, format):
        rec = _record_from_json(obj, labels, line_no)
        if rec is None:
            dropped += 1
            continue
        papers[rec.doi] = _union(papers[rec.doi], rec) if rec.doi in papers else rec
    if dropped:
        log.info("dropped %d record(s) without DOI", dropped)
    if not papers:
        raise EmptyCorpus("no record with a DOI survived ingestion")
    return Corpus(papers, field_a_label, field_b_label, dropped)


def read_corpus(path: str | Path, format: str | None = None,
                field_a_label: str = "BE", field_b_label: str = "CS") -> Corpus:
    path = Path(path)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    with path.open(encoding="utf-8", newline="") as fh:
        return ingest_records(fh, fmt, field_a_label, field_b_label)


def merge_corpora(primary: Corpus, secondary: Corpus) -> Corpus:
    """Add secondary records whose DOI is new; colliding DOIs keep the primary record as is."""
    if (primary.field_a_label, primary.field_b_label) != (secondary.field_a_label, secondary.field_b_label):
        raise LabelMismatch(
            f"field labels differ: {(primary.field_a_label, primary.field_b_label)} vs "
            f"{(secondary.field_a_label, secondary.field_b_label)}")
    papers = dict(primary.papers)
    for doi, rec in secondary.papers.items():
        papers.setdefault(doi, rec)
    return Corpus(papers, primary.field_a_label, primary.field_b_label, primary.dropped + secondary.dropped)


# --- filters -------------------------------------------------------------

def _text_of(paper: PaperRecord, name: str) -> str:
    value = getattr(paper, name)
    if value is None:
        return ""
    if name == "authors":
        return "; ".join(a.display_name or a.author_id for a in value)
    if name == "venue":
        return value.name or value.venue_id
    if isinstance(value, (frozenset, set, tuple)):
        return "; ".join(sorted(map(str, value)))
    return str(value)


def _read_doi_list(spec: dict, base_dir: Path | None) -> frozenset[str]:
    dois = list(spec.get("dois") or ())
    if spec.get("file"):
        path = Path(spec["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        dois += [ln.split("#", 1)[0] for ln in path.read_text(encoding="utf-8").splitlines()]
    return frozenset(d for d in map(canonical_doi, dois) if d)


@dataclass(frozen=True)
class Filter:
    """One cleaning predicate. ``keep(paper)`` returns False to reject."""

    kind: str
    name: str
    field: str | None = None
    pattern: re.Pattern | None = None
    dois: frozenset[str] = frozenset()

    def keep(self, paper: PaperRecord) -> bool:
        if self.kind == "blocklist_regex":
            return self.pattern.search(_text_of(paper, self.field)) is None
        if self.kind == "allowlist_regex":
            return self.pattern.search(_text_of(paper, self.field)) is not None
        if self.kind == "require":
            return bool(_text_of(paper, self.field).strip())
        if self.kind == "allowlist":
            return paper.doi in self.dois
        if self.kind == "blocklist":
            return paper.doi not in self.dois
        raise AssertionError(self.kind)


FILTER_KINDS = ("blocklist_regex", "allowlist_regex", "require", "allowlist", "blocklist")


def parse_filter(spec: dict, base_dir: Path | None = None) -> Filter:
    kind = spec.get("kind")
    if kind not in FILTER_KINDS:
        raise UnknownField(spec)
    fld = spec.get("field")
    if kind in ("blocklist_regex", "allowlist_regex", "require"):
        if fld not in PAPER_FIELD_NAMES:
            raise UnknownField(spec)
    name = spec.get("name") or (f"{kind}:{fld}" if fld else kind)
    pattern = re.compile(spec["pattern"], re.IGNORECASE) if "regex" in kind else None
    dois = _read_doi_list(spec, base_dir) if kind in ("allowlist", "blocklist") else frozenset()
    return Filter(kind, name, fld, pattern, dois)


FilterLog = list[tuple[str, str]]


def apply_filters(c: Corpus, filters: Sequence[dict | Filter],
                  base_dir: Path | None = None) -> tuple[Corpus, FilterLog]:
    """Apply predicates in order; each paper is logged against the first filter rejecting it."""
    preds = [f if isinstance(f, Filter) else parse_filter(f, base_dir) for f in filters]
    kept: dict[str, PaperRecord] = {}
    rejected: FilterLog = []
    for doi, paper in c.papers.items():
        for pred in preds:
            if not pred.keep(paper):
                rejected.append((doi, pred.name))
                break
        else:
            kept[doi] = paper
    return c.replace_papers(kept), rejected


def load_filters(path: str | Path) -> list[Filter]:
    path = Path(path)
    specs = json.loads(path.read_text(encoding="utf-8"))
    return [parse_filter(s, path.parent) for s in specs]
