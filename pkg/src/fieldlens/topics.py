"""Per-community text bundles for an external labeler, and parsing of its answers.

The labeler itself (an LLM or a person) is out of process: bundles go out as
text, answers come back as text in the ``Community number: N --- Description: ...``
line format.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .communities import Partition
from .corpus import Corpus
from .errors import BadMapFile, NoLabelsFound

log = logging.getLogger(__name__)

SEPARATOR = " --- "
MISSING_ABSTRACT = "Not found"


@dataclass(frozen=True)
class TopicBundle:
    community_id: int
    entries: tuple[str, ...]


@dataclass(frozen=True)
class TopicLabel:
    community_id: int
    description: str
    normalized: str | None = None


def _one_line(text: str) -> str:
    return " ".join(text.split())


def render_entry(title: str, abstract: str | None, community_id: int) -> str:
    abstract = _one_line(abstract) if abstract and abstract.strip() else MISSING_ABSTRACT
    return SEPARATOR.join((_one_line(title), abstract, str(community_id)))


def build_bundles(partition: Partition, corpus: Corpus) -> list[TopicBundle]:
    """One bundle per community id 0..max, entries in DOI order.

    Papers missing from the corpus are rendered with their DOI as title.
    """
    members = partition.members()
    n = max(members) + 1 if members else 0
    bundles = []
    for cid in range(n):
        lines = []
        for doi in sorted(members.get(cid, ())):
            paper = corpus.get(doi)
            if paper is None:
                lines.append(render_entry(doi, None, cid))
            else:
                lines.append(render_entry(paper.title or doi, paper.abstract, cid))
        bundles.append(TopicBundle(cid, tuple(lines)))
    return bundles


def default_header() -> str:
    return resources.files("fieldlens.data").joinpath("prompt_header.txt").read_text(encoding="utf-8")


def render_bundle_file(bundles: Sequence[TopicBundle], header: str | None = None) -> str:
    header = default_header() if header is None else header
    blocks = ["\n".join(b.entries) for b in bundles]
    return header.rstrip("\n") + "\n\n" + "\n\n".join(blocks) + "\n"


_LABEL_RE = re.compile(
    r"^\s*\**\s*community\s+number\s*:\s*(\d+)\s*-{3}\s*description\s*:\s*(.*?)\s*,?\s*$",
    re.IGNORECASE,
)


def parse_labels(response: str) -> list[TopicLabel]:
    by_id: dict[int, TopicLabel] = {}
    for line in response.splitlines():
        m = _LABEL_RE.match(line)
        if not m:
            continue
        cid = int(m.group(1))
        desc = m.group(2).strip().strip("*").strip()
        if not desc:
            continue
        if cid in by_id:
            log.warning("community %d labelled twice; keeping the last label", cid)
            del by_id[cid]
        words = len(desc.split())
        if not 3 <= words <= 5:
            log.debug("label for community %d has %d words", cid, words)
        by_id[cid] = TopicLabel(cid, desc)
    if not by_id:
        raise NoLabelsFound("no 'Community number: N --- Description: ...' line found")
    return list(by_id.values())


def load_label_map(map_file: str | Path) -> list[tuple[str, re.Pattern, str]]:
    """Rows of (raw pattern, compiled case-insensitive regex, canonical label)."""
    path = Path(map_file)
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise BadMapFile(f"cannot read label map {path}: {exc}") from exc
    if not rows:
        return []
    if [c.strip().lower() for c in rows[0]] != ["pattern", "canonical"]:
        raise BadMapFile(f"{path}: header must be 'pattern,canonical'")
    out = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 2 or not row[0].strip() or not row[1].strip():
            raise BadMapFile(f"{path}:{line_no}: expected two non-empty columns")
        raw = row[0].strip()
        try:
            rx = re.compile(raw, re.IGNORECASE)
        except re.error as exc:
            raise BadMapFile(f"{path}:{line_no}: bad pattern {raw!r}: {exc}") from exc
        out.append((raw, rx, row[1].strip()))
    return out


def normalize_labels(labels: Sequence[TopicLabel], map_file: str | Path | None) -> list[TopicLabel]:
    """Rewrite ``normalized`` via the first row whose pattern equals (case-insensitively)
    or fully matches the description; unmatched labels normalize to themselves."""
    table = load_label_map(map_file) if map_file is not None else []
    out = []
    for lab in labels:
        text = lab.description.strip()
        canonical = next((c for raw, _, c in table if raw.casefold() == text.casefold()), None)
        if canonical is None:
            canonical = next((c for _, rx, c in table if rx.fullmatch(text)), text)
        out.append(dataclasses.replace(lab, normalized=canonical))
    return out


def render_labels(labels: Sequence[TopicLabel]) -> str:
    return "".join(f"Community number: {l.community_id} --- Description: {l.description}\n"
                   for l in sorted(labels, key=lambda l: l.community_id))
