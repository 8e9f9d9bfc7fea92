import itertools
import json

import pytest

from slrpipe.config import BUILTIN_PROVIDERS
from slrpipe.domain import PaperRecord, ReviewProtocol, merge_records, records_equivalent
from slrpipe.errors import AllProvidersFailed
from slrpipe.querylang import parse_query
from slrpipe.retrieval import (
    FaultyTransport,
    FixtureTransport,
    ProviderDescriptor,
    TokenBucket,
    build_request,
    deduplicate,
    fetch_candidates,
    get_path,
    map_item,
)

from conftest import FIXTURES

FIXTURE_PROVIDER = BUILTIN_PROVIDERS["fixture"]
QUERY = parse_query("large language models OR software development")


def protocol(max_records=10, year=(None, None)):
    return ReviewProtocol(topic="t", query=QUERY, year_range=year,
                          max_records=max_records)


def transport():
    return FixtureTransport(FIXTURES / "providers")


class TestGetPath:
    def test_dotted_and_indexed(self):
        data = {"message": {"items": [{"title": ["T"]}]}}
        assert get_path(data, "message.items.0.title.0") == "T"

    def test_missing_returns_none(self):
        assert get_path({"a": 1}, "a.b.c") is None
        assert get_path({"a": [1]}, "a.5") is None


class TestBuildRequest:
    def test_year_bounds_share_crossref_filter_param(self):
        req = build_request(BUILTIN_PROVIDERS["crossref"], QUERY, (2020, 2023), 1)
        assert req["params"]["filter"] == (
            "from-pub-date:2020-01-01,until-pub-date:2023-12-31")

    def test_openalex_filter_param(self):
        req = build_request(BUILTIN_PROVIDERS["openalex"], QUERY, (2023, 2023), 1)
        assert req["params"]["filter"] == (
            "from_publication_date:2023-01-01,to_publication_date:2023-12-31")

    def test_open_ended_range_omits_bound(self):
        req = build_request(BUILTIN_PROVIDERS["crossref"], QUERY, (2020, None), 1)
        assert req["params"]["filter"] == "from-pub-date:2020-01-01"
        req2 = build_request(BUILTIN_PROVIDERS["crossref"], QUERY, (None, None), 1)
        assert "filter" not in req2["params"]

    def test_query_translated_per_dialect(self):
        req = build_request(FIXTURE_PROVIDER, QUERY, (None, None), 1)
        assert req["params"][FIXTURE_PROVIDER.query_param] == (
            "%22large%20language%20models%22%20OR%20%22software%20development%22")
        req2 = build_request(BUILTIN_PROVIDERS["crossref"], QUERY, (None, None), 1)
        assert req2["params"]["query.bibliographic"] == (
            '"large language models" OR "software development"')

    def test_deterministic(self):
        a = build_request(FIXTURE_PROVIDER, QUERY, (2023, 2023), 1)
        b = build_request(FIXTURE_PROVIDER, QUERY, (2023, 2023), 1)
        assert a == b


class TestMapItem:
    def test_crossref_shape(self):
        item = {
            "title": ["A Title"],
            "DOI": "10.1/ABC",
            "published": {"date-parts": [[2023, 5]]},
            "author": [{"given": "Ada", "family": "Lovelace"}],
            "container-title": ["Journal X"],
            "URL": "https://example.org/p",
            "abstract": "An abstract.",
        }
        record = map_item(BUILTIN_PROVIDERS["crossref"], item, 0)
        assert record.title == "A Title"
        assert record.doi == "10.1/abc"
        assert record.year == 2023
        assert record.authors == ("Ada Lovelace",)
        assert record.provenance == ("crossref:10.1/ABC",)

    def test_sparse_item_still_maps(self):
        record = map_item(BUILTIN_PROVIDERS["crossref"], {"title": ["Only Title"]}, 3)
        assert record.title == "Only Title"
        assert record.doi is None
        assert record.year is None
        assert record.provenance == ("crossref:3",)

    def test_fixture_corpus_mapping_total(self):
        with open(FIXTURES / "providers" / "fixture" / "1.json", encoding="utf-8") as fh:
            page = json.load(fh)
        for i, item in enumerate(page["items"]):
            record = map_item(FIXTURE_PROVIDER, item, i)
            assert record.title
            assert record.record_id


class TestFetch:
    def test_demo_pool_is_ten(self):
        records = fetch_candidates(protocol(), [FIXTURE_PROVIDER], transport())
        assert len(records) == 10
        assert all(isinstance(r, PaperRecord) for r in records)

    def test_max_records_caps_single_page(self):
        records = fetch_candidates(protocol(max_records=3), [FIXTURE_PROVIDER],
                                   transport())
        assert len(records) == 3

    def test_multi_page_cursor_round_trip(self, tmp_path):
        root = tmp_path / "providers"
        (root / "paged").mkdir(parents=True)
        items1 = [{"title": f"Paper {i}", "year": 2023} for i in range(4)]
        items2 = [{"title": f"Paper {i}", "year": 2023} for i in range(4, 6)]
        (root / "paged" / "1.json").write_text(
            json.dumps({"items": items1, "next_page": 2}))
        (root / "paged" / "2.json").write_text(json.dumps({"items": items2}))
        provider = ProviderDescriptor(
            tag="paged", base_url="fixture://paged", page_size=4,
            field_map={"title": "title", "year": "year"})
        t = FixtureTransport(root)
        records = fetch_candidates(protocol(), [provider], t)
        assert [r.title for r in records] == [f"Paper {i}" for i in range(6)]
        # the second request carried the cursor the first response returned
        assert [req["params"]["page"] for req in t.requests] == ["1", "2"]

    def test_failing_provider_is_isolated(self):
        events = []
        good = FIXTURE_PROVIDER
        bad = ProviderDescriptor(tag="broken", base_url="fixture://broken")
        t = FaultyTransport(transport(), ["broken"])
        records = fetch_candidates(
            protocol(), [bad, good], t,
            event_sink=lambda kind, payload: events.append((kind, payload)))
        assert len(records) == 10
        assert events == [("provider_failed",
                           {"provider": "broken",
                            "error": "provider broken returned HTTP 500"})]

    def test_all_providers_failing_raises(self):
        bad = ProviderDescriptor(tag="broken", base_url="fixture://broken")
        t = FaultyTransport(transport(), ["broken"])
        with pytest.raises(AllProvidersFailed):
            fetch_candidates(protocol(), [bad], t)

    def test_results_concatenated_in_config_order(self, tmp_path):
        root = tmp_path / "providers"
        for tag, titles in (("p1", ["A1", "A2"]), ("p2", ["B1"])):
            (root / tag).mkdir(parents=True)
            (root / tag / "1.json").write_text(json.dumps(
                {"items": [{"title": t} for t in titles]}))
        mk = lambda tag: ProviderDescriptor(tag=tag, base_url=f"fixture://{tag}",
                                            field_map={"title": "title"})
        records = fetch_candidates(protocol(), [mk("p1"), mk("p2")],
                                   FixtureTransport(root))
        assert [r.title for r in records] == ["A1", "A2", "B1"]
        records2 = fetch_candidates(protocol(), [mk("p2"), mk("p1")],
                                    FixtureTransport(root))
        assert [r.title for r in records2] == ["B1", "A1", "A2"]


class FakeClock:
    def __init__(self):
        self.t = 0.0
        self.sleeps = []

    def now(self):
        return self.t

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.t += seconds


class TestRateLimit:
    def test_minimum_spacing_enforced(self):
        clock = FakeClock()
        bucket = TokenBucket(rate=2.0, clock=clock)  # 0.5 s between requests
        times = []
        for _ in range(4):
            bucket.acquire()
            times.append(clock.t)
        gaps = [b - a for a, b in zip(times, times[1:])]
        assert all(g >= 0.5 for g in gaps)
        assert clock.sleeps == [0.5, 0.5, 0.5]

    def test_no_sleep_when_already_spaced(self):
        clock = FakeClock()
        bucket = TokenBucket(rate=2.0, clock=clock)
        bucket.acquire()
        clock.t += 1.0
        bucket.acquire()
        assert clock.sleeps == []


def reference_dedup(records):
    """Independent O(n^2) oracle: greedy clustering by pairwise equivalence
    against the first member of each cluster chain, then in-order merge."""
    clusters = []
    for record in records:
        for cluster in clusters:
            if any(records_equivalent(record, member) for member in cluster):
                cluster.append(record)
                break
        else:
            clusters.append([record])
    out = []
    for cluster in clusters:
        merged = cluster[0]
        for member in cluster[1:]:
            merged = merge_records(merged, member)
        out.append(merged)
    return out


def make_pool():
    """12 raw records, 10 unique: one DOI duplicate pair, one title duplicate
    pair across providers."""
    def rec(title, doi=None, year=2023, tag="p1"):
        return PaperRecord.build(title, doi=doi, year=year,
                                 source_provider=tag,
                                 provenance=(f"{tag}:{doi or title}",))
    pool = [rec(f"Distinct Paper {i}") for i in range(8)]
    pool.insert(2, rec("Shared DOI Paper", doi="10.1/dup"))
    pool.insert(5, rec("Shared DOI paper (v2)", doi="10.1/dup", tag="p2"))
    pool.insert(7, rec("Same Title Twice"))
    pool.append(rec("Same Title twice!", tag="p2"))
    assert len(pool) == 12
    return pool


class TestDeduplicate:
    def test_twelve_raw_ten_unique(self):
        pool = make_pool()
        unique, merge_log = deduplicate(pool)
        assert len(unique) == 10
        assert sum(len(r.provenance) for r in unique) == 12
        assert len(merge_log) == 2
        oracle = reference_dedup(pool)
        assert [r.record_id for r in unique] == [r.record_id for r in oracle]
        assert [r.provenance for r in unique] == [r.provenance for r in oracle]

    def test_no_duplicates_is_identity(self):
        pool = [PaperRecord.build(f"Unique {i}", provenance=(f"p:{i}",))
                for i in range(5)]
        unique, merge_log = deduplicate(pool)
        assert unique == pool
        assert merge_log == []

    def test_cluster_count_invariant_under_permutation(self):
        pool = make_pool()[:6]
        baseline = len(deduplicate(pool)[0])
        for perm in itertools.permutations(range(6)):
            shuffled = [pool[i] for i in perm]
            assert len(deduplicate(shuffled)[0]) == baseline

    def test_merge_log_references_real_ids(self):
        pool = make_pool()
        unique, merge_log = deduplicate(pool)
        kept_ids = {r.record_id for r in unique}
        raw_ids = {r.record_id for r in pool}
        for entry in merge_log:
            assert entry["kept"] in kept_ids
            assert set(entry["absorbed"]) <= raw_ids
