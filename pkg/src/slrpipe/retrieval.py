"""Retrieval stage: execute the search query against scholarly-metadata HTTP
providers with pagination, year filters and rate limiting, then deduplicate
the raw pool into candidate records."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import querylang
from .domain import PaperRecord, ReviewProtocol, make_record_id, merge_records, records_equivalent
from .errors import AllProvidersFailed, SlrError

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Provider descriptors (config data, not code)


@dataclass(frozen=True)
class ProviderDescriptor:
    tag: str
    base_url: str
    dialect: str = "url_keywords"
    page_size: int = 10
    rate_limit: float = 5.0  # requests per second
    query_param: str = "query"
    page_param: str = "page"
    page_size_param: str = "rows"
    year_start_param: str = ""
    year_end_param: str = ""
    year_format: str = "{year}"
    year_end_format: str = ""  # defaults to year_format
    extra_params: dict = field(default_factory=dict)
    items_path: str = "items"
    next_page_path: str = "next_page"
    field_map: dict = field(default_factory=dict)  # PaperRecord field -> JSON path
    defaults: dict = field(default_factory=dict)  # PaperRecord field -> constant

    def __post_init__(self):
        if self.page_size < 1:
            raise ValueError("page_size must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ProviderDescriptor":
        return cls(**d)


def get_path(data, path: str):
    """Resolve a dotted path; numeric segments index lists."""
    cur = data
    for seg in path.split("."):
        if cur is None:
            return None
        if isinstance(cur, list):
            try:
                cur = cur[int(seg)]
            except (ValueError, IndexError):
                return None
        elif isinstance(cur, dict):
            cur = cur.get(seg)
        else:
            return None
    return cur


# ---------------------------------------------------------------------------
# Rate limiting


class SystemClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float):
        time.sleep(seconds)


class TokenBucket:
    """One-token bucket: enforces >= 1/rate seconds between requests."""

    def __init__(self, rate: float, clock=None):
        self.interval = 1.0 / rate if rate > 0 else 0.0
        self.clock = clock or SystemClock()
        self._next_free = None

    def acquire(self):
        now = self.clock.now()
        if self._next_free is not None and now < self._next_free:
            self.clock.sleep(self._next_free - now)
            now = self._next_free
        self._next_free = now + self.interval


# ---------------------------------------------------------------------------
# Transports


class HttpTransport:
    """Live HTTP GET with a descriptive user agent."""

    def __init__(self, contact: str = "", timeout: float = 30.0):
        self.user_agent = f"slrpipe/0.1 (mailto:{contact})" if contact else "slrpipe/0.1"
        self.timeout = timeout

    def get(self, provider: ProviderDescriptor, request: dict, page_index: int) -> dict:
        import httpx

        resp = httpx.get(
            request["url"],
            params=request["params"],
            headers={"User-Agent": self.user_agent},
            timeout=self.timeout,
        )
        if resp.status_code != 200:
            raise SlrError(f"provider {provider.tag} returned HTTP {resp.status_code}")
        return resp.json()


class FixtureTransport:
    """Reads canned responses from fixtures/providers/<tag>/<page>.json."""

    def __init__(self, root):
        self.root = Path(root)
        self.requests: list[dict] = []  # inspection hook for tests

    def get(self, provider: ProviderDescriptor, request: dict, page_index: int) -> dict:
        self.requests.append({"provider": provider.tag, "page": page_index, **request})
        path = self.root / provider.tag / f"{page_index}.json"
        if not path.exists():
            raise SlrError(f"no fixture page for {provider.tag} page {page_index}")
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)


class FaultyTransport:
    """Test helper: fail for configured providers, delegate the rest."""

    def __init__(self, inner, failing_tags):
        self.inner = inner
        self.failing_tags = set(failing_tags)

    def get(self, provider, request, page_index):
        if provider.tag in self.failing_tags:
            raise SlrError(f"provider {provider.tag} returned HTTP 500")
        return self.inner.get(provider, request, page_index)


# ---------------------------------------------------------------------------
# Requests and fetching


def build_request(provider: ProviderDescriptor, ast, year_range, cursor) -> dict:
    """Deterministic request descriptor for one page."""
    params = dict(provider.extra_params)
    params[provider.query_param] = querylang.translate_query(ast, provider.dialect)
    start, end = year_range

    def add_param(key, value):
        # Providers like Crossref pack both year bounds into one filter key.
        if key in params:
            params[key] = f"{params[key]},{value}"
        else:
            params[key] = value

    if provider.year_start_param and start is not None:
        add_param(provider.year_start_param, provider.year_format.format(year=start))
    if provider.year_end_param and end is not None:
        fmt = provider.year_end_format or provider.year_format
        add_param(provider.year_end_param, fmt.format(year=end))
    if provider.page_size_param:
        params[provider.page_size_param] = str(provider.page_size)
    params[provider.page_param] = str(cursor)
    return {"url": provider.base_url, "params": params}


def map_item(provider: ProviderDescriptor, item: dict, index: int) -> PaperRecord:
    fields: dict = dict(provider.defaults)
    for name, path in provider.field_map.items():
        value = get_path(item, path)
        if value is not None:
            fields[name] = value
    title = fields.pop("title", "") or ""
    authors = fields.pop("authors", ())
    if authors and isinstance(authors[0], dict):
        authors = tuple(
            " ".join(str(v) for v in (a.get("given"), a.get("family"), a.get("name")) if v)
            for a in authors
        )
    year = fields.pop("year", None)
    doi = fields.pop("doi", None)
    fields.pop("record_id", None)
    fields.pop("provenance", None)
    record_id = make_record_id(title, doi)
    return PaperRecord(
        record_id=record_id,
        title=title,
        authors=tuple(authors),
        doi=doi,
        year=int(year) if year is not None else None,
        source_provider=provider.tag,
        provenance=(f"{provider.tag}:{doi or index}",),
        **fields,
    )


def _fetch_provider(provider: ProviderDescriptor, protocol: ReviewProtocol,
                    transport, clock=None) -> list[PaperRecord]:
    bucket = TokenBucket(provider.rate_limit, clock)
    records: list[PaperRecord] = []
    cursor = 1
    page_index = 1
    seen = 0
    while len(records) < protocol.max_records:
        bucket.acquire()
        request = build_request(provider, protocol.query, protocol.year_range, cursor)
        response = transport.get(provider, request, page_index)
        items = get_path(response, provider.items_path) or []
        for item in items:
            if len(records) >= protocol.max_records:
                break
            records.append(map_item(provider, item, seen))
            seen += 1
        next_cursor = get_path(response, provider.next_page_path)
        if next_cursor is None or not items:
            break
        cursor = next_cursor
        page_index += 1
    return records


def fetch_candidates(protocol: ReviewProtocol, providers, transport,
                     clock=None, event_sink=None) -> list[PaperRecord]:
    """Query every provider (concurrently), isolate per-provider failures,
    and concatenate results in provider-config order, capped at max_records."""
    if protocol.query is None:
        raise SlrError("protocol has no search query")
    results: dict[str, list[PaperRecord]] = {}
    failures: dict[str, str] = {}

    def run(provider):
        try:
            results[provider.tag] = _fetch_provider(provider, protocol, transport, clock)
        except Exception as exc:  # noqa: BLE001 - failures are isolated by design
            failures[provider.tag] = str(exc)

    with ThreadPoolExecutor(max_workers=max(1, len(providers))) as pool:
        list(pool.map(run, providers))

    for tag, message in failures.items():
        log.warning("provider %s failed: %s", tag, message)
        if event_sink is not None:
            event_sink("provider_failed", {"provider": tag, "error": message})
    if failures and not results:
        raise AllProvidersFailed(f"all providers failed: {failures}")

    merged: list[PaperRecord] = []
    for provider in providers:
        merged.extend(results.get(provider.tag, ()))
    return merged[: protocol.max_records]


# ---------------------------------------------------------------------------
# Deduplication


def deduplicate(records) -> tuple[list[PaperRecord], list[dict]]:
    """Union-find clustering under records_equivalent; clusters merged in
    arrival order. Returns (unique records, merge log)."""
    records = list(records)
    n = len(records)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            ri, rj = find(i), find(j)
            if ri != rj and records_equivalent(records[i], records[j]):
                parent[max(ri, rj)] = min(ri, rj)

    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)

    out: list[PaperRecord] = []
    merge_log: list[dict] = []
    for root in sorted(clusters):
        members = clusters[root]
        merged = records[members[0]]
        for idx in members[1:]:
            merged = merge_records(merged, records[idx])
        out.append(merged)
        if len(members) > 1:
            merge_log.append(
                {
                    "kept": merged.record_id,
                    "absorbed": [records[i].record_id for i in members[1:]],
                }
            )
    return out, merge_log
