"""Paged REST harvesting of bibliographic records with an on-disk page cache.

Every response page is written to ``<cache_dir>/<source>/<query-hash>/<page>.json``
before its records are handed out, so a rerun with a warm cache is fully offline.
Two source adapters are shipped: ``source1`` speaks a Scopus-like search/abstract
shape, ``source2`` a WoS-like one. Only the fields a :class:`PaperRecord` needs
are read.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Mapping, NamedTuple, Sequence

from .corpus import canonical_doi
from .errors import AuthError, RateLimited, SourceSchemaError

log = logging.getLogger(__name__)

SOURCES = ("source1", "source2")
KEY_ENV = {"source1": "FIELDLENS_SOURCE1_KEY", "source2": "FIELDLENS_SOURCE2_KEY"}
DEFAULT_BASE_URL = {
    "source1": "https://api.elsevier.com/content",
    "source2": "https://wos-api.clarivate.com/api",
}


class HttpResponse(NamedTuple):
    status: int
    headers: Mapping[str, str]
    text: str


Transport = Callable[[str, Mapping[str, str], Mapping[str, str]], HttpResponse]


def requests_transport(url: str, params: Mapping[str, str], headers: Mapping[str, str]) -> HttpResponse:
    import requests

    r = requests.get(url, params=params, headers=headers, timeout=30)
    return HttpResponse(r.status_code, dict(r.headers), r.text)


@dataclass(frozen=True)
class QuerySpec:
    keywords: Sequence[str]
    target_field_label: str
    field_scope: Mapping[str, str] = field(default_factory=dict)  # source id -> subject restriction

    def __post_init__(self):
        if not self.keywords:
            raise ValueError("QuerySpec needs at least one keyword expression")

    @classmethod
    def from_json(cls, obj: dict) -> QuerySpec:
        return cls(tuple(obj["keywords"]), obj["target_field_label"], dict(obj.get("field_scope") or {}))


# --- adapters ------------------------------------------------------------

class SourceAdapter:
    source_id: str
    key_header: str

    def search_request(self, base: str, query: str, start: int, count: int) -> tuple[str, dict]:
        raise NotImplementedError

    def parse_search(self, body: dict) -> tuple[list[dict], int]:
        """(records in corpus schema minus labels, total hits)."""
        raise NotImplementedError

    def query_string(self, keyword: str, scope: str | None) -> str:
        raise NotImplementedError

    def references_request(self, base: str, doi: str) -> tuple[str, dict]:
        raise NotImplementedError

    def parse_references(self, body: dict) -> list[str]:
        raise NotImplementedError


def _require(obj, *path):
    for key in path:
        if not isinstance(obj, dict) or key not in obj:
            raise SourceSchemaError(f"response is missing {'/'.join(path)}")
        obj = obj[key]
    return obj


class ScopusLikeAdapter(SourceAdapter):
    source_id = "source1"
    key_header = "X-ELS-APIKey"

    def query_string(self, keyword, scope):
        q = f"TITLE-ABS-KEY({keyword})"
        return f"{q} AND {scope}" if scope else q

    def search_request(self, base, query, start, count):
        return f"{base}/search/scopus", {"query": query, "start": str(start), "count": str(count)}

    def parse_search(self, body):
        res = _require(body, "search-results")
        total = int(_require(res, "opensearch:totalResults"))
        records = []
        for e in res.get("entry") or ():
            if "error" in e:  # empty result sets carry a single error entry
                continue
            date = e.get("prism:coverDate") or ""
            agg = (e.get("prism:aggregationType") or "").lower()
            venue_name = e.get("prism:publicationName")
            records.append({
                "doi": e.get("prism:doi"),
                "title": e.get("dc:title") or "",
                "abstract": e.get("dc:description"),
                "year": int(date[:4]) if date[:4].isdigit() else None,
                "authors": [{"id": str(a["authid"]), "name": a.get("authname", "")}
                            for a in e.get("author") or () if a.get("authid")],
                "venue": None if not venue_name else {
                    "id": str(e.get("source-id") or venue_name),
                    "name": venue_name,
                    "kind": "conference" if "conference" in agg else "journal",
                },
                "references": [],
            })
        return records, total

    def references_request(self, base, doi):
        return f"{base}/abstract/doi/{doi}", {"view": "REF"}

    def parse_references(self, body):
        refs = _require(body, "abstracts-retrieval-response", "references")
        return [r.get("prism:doi") for r in refs.get("reference") or () if r.get("prism:doi")]


class WosLikeAdapter(SourceAdapter):
    source_id = "source2"
    key_header = "X-ApiKey"

    def query_string(self, keyword, scope):
        q = f"TS=({keyword})"
        return f"{q} AND {scope}" if scope else q

    def search_request(self, base, query, start, count):
        return f"{base}/wos", {"usrQuery": query, "firstRecord": str(start + 1), "count": str(count)}

    def parse_search(self, body):
        total = int(_require(body, "QueryResult", "RecordsFound"))
        records = []
        for r in _require(body, "Data", "Records") or ():
            src = r.get("source") or {}
            records.append({
                "doi": r.get("doi"),
                "title": r.get("title") or "",
                "abstract": r.get("abstract"),
                "year": r.get("year"),
                "authors": [{"id": str(a["id"]), "name": a.get("name", "")} for a in r.get("authors") or () if a.get("id")],
                "venue": None if not src.get("title") else {
                    "id": str(src.get("id") or src["title"]),
                    "name": src["title"],
                    "kind": "conference" if (src.get("type") or "").lower().startswith("conf") else "journal",
                },
                "references": [],
            })
        return records, total

    def references_request(self, base, doi):
        return f"{base}/references/{doi}", {}

    def parse_references(self, body):
        return [r.get("doi") for r in _require(body, "Data") or () if r.get("doi")]


ADAPTERS: dict[str, type[SourceAdapter]] = {"source1": ScopusLikeAdapter, "source2": WosLikeAdapter}

UNRESOLVED = "null"

_SOURCE_LOCKS = {s: threading.Lock() for s in SOURCES}


# --- session -------------------------------------------------------------

def query_hash(source_id: str, query: str, page_size: int) -> str:
    blob = json.dumps([source_id, query, page_size], separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


@dataclass
class HarvestSession:
    source_id: str
    cache_dir: Path
    page_size: int = 25
    base_url: str | None = None
    api_key: str | None = None
    transport: Transport = requests_transport
    sleep: Callable[[float], None] = time.sleep
    backoff_base: float = 1.0
    backoff_cap: float = 60.0
    max_retries: int = 8
    cursor: str | None = None
    retrieved: int = 0
    network_calls: int = 0
    unresolved: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.source_id not in ADAPTERS:
            raise ValueError(f"unknown source {self.source_id!r}; expected one of {SOURCES}")
        if self.page_size < 1:
            raise ValueError("page_size must be positive")
        self.cache_dir = Path(self.cache_dir)
        self.adapter = ADAPTERS[self.source_id]()
        self.base_url = (self.base_url or DEFAULT_BASE_URL[self.source_id]).rstrip("/")

    def _key(self) -> str:
        key = self.api_key or os.environ.get(KEY_ENV[self.source_id])
        if not key:
            raise AuthError(f"no API credential: set {KEY_ENV[self.source_id]}")
        return key

    def _get(self, url: str, params: Mapping[str, str], allow_404: bool = False) -> str | None:
        headers = {self.adapter.key_header: self._key(), "Accept": "application/json"}
        attempt = 0
        with _SOURCE_LOCKS[self.source_id]:
            while True:
                self.network_calls += 1
                resp = self.transport(url, params, headers)
                if resp.status == 200:
                    return resp.text
                if resp.status in (401, 403):
                    raise AuthError(f"{self.source_id} rejected the credential (HTTP {resp.status})")
                if resp.status == 404 and allow_404:
                    return None
                if resp.status == 429 or resp.status >= 500:
                    wait = _retry_after(resp.headers)
                    if wait is None:
                        wait = min(self.backoff_cap, self.backoff_base * 2 ** attempt)
                    attempt += 1
                    if attempt > self.max_retries:
                        raise RateLimited(wait)
                    log.info("%s: HTTP %d, waiting %.1fs", self.source_id, resp.status, wait)
                    self.sleep(wait)
                    continue
                raise SourceSchemaError(f"{self.source_id}: unexpected HTTP {resp.status} for {url}")

    def cached_get(self, cache_key: str, page: int, url: str, params: Mapping[str, str],
                   allow_404: bool = False) -> str | None:
        path = self.cache_dir / self.source_id / cache_key / f"{page}.json"
        if path.exists():
            text = path.read_text(encoding="utf-8")
            return None if allow_404 and text == UNRESOLVED else text
        text = self._get(url, params, allow_404)
        # a 404 is remembered too, otherwise warm reruns would ask again
        _atomic_write(path, UNRESOLVED if text is None else text)
        return text


def _retry_after(headers: Mapping[str, str]) -> float | None:
    for k, v in headers.items():
        if k.lower() == "retry-after":
            try:
                return max(0.0, float(v))
            except ValueError:
                return None
    return None


def _decode(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SourceSchemaError(f"response is not JSON: {exc.msg}") from exc


def run_query(q: QuerySpec, session: HarvestSession) -> Iterator[dict]:
    """Yield corpus-schema records for every keyword of ``q``, page by page.

    A DOI already yielded in this call (e.g. matched by two keywords) is not
    repeated; records without a DOI pass through and are dropped at ingest.
    """
    adapter = session.adapter
    scope = q.field_scope.get(session.source_id)
    seen: set[str] = set()
    for keyword in q.keywords:
        query = adapter.query_string(keyword, scope)
        key = query_hash(session.source_id, query, session.page_size)
        page, start = 0, 0
        while True:
            session.cursor = f"{key}:{page}"
            url, params = adapter.search_request(session.base_url, query, start, session.page_size)
            body = _decode(session.cached_get(key, page, url, params))
            records, total = adapter.parse_search(body)
            for rec in records:
                doi = canonical_doi(rec.get("doi"))
                if doi and doi in seen:
                    continue
                if doi:
                    seen.add(doi)
                rec["fields"] = [q.target_field_label]
                rec["source"] = session.source_id
                session.retrieved += 1
                yield rec
            start += len(records)
            page += 1
            if not records or start >= total:
                break


def fetch_references(dois, session: HarvestSession) -> dict[str, set[str]]:
    if not dois:
        raise ValueError("fetch_references needs at least one DOI")
    adapter = session.adapter
    out: dict[str, set[str]] = {}
    for doi in sorted({canonical_doi(d) for d in dois} - {""}):
        key = "refs-" + query_hash(session.source_id, doi, 0)
        url, params = adapter.references_request(session.base_url, doi)
        text = session.cached_get(key, 0, url, params, allow_404=True)
        if text is None:
            log.warning("%s: no reference data for %s", session.source_id, doi)
            session.unresolved.append(doi)
            out[doi] = set()
            continue
        refs = {canonical_doi(r) for r in adapter.parse_references(_decode(text))}
        out[doi] = refs - {"", doi}
    return out


def harvest(queries: Sequence[QuerySpec], session: HarvestSession,
            with_references: bool = True) -> list[dict]:
    records = [r for q in queries for r in run_query(q, session)]
    if with_references:
        dois = {canonical_doi(r.get("doi")) for r in records} - {""}
        if dois:
            refs = fetch_references(dois, session)
            for r in records:
                r["references"] = sorted(refs.get(canonical_doi(r.get("doi")), ()))
    return records


def to_jsonl(records: Sequence[dict]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in records)
