"""Configuration: INI-style file with sections for the model endpoint, the
run store, limits, pause policy and provider descriptors. Environment
variables override the file for secrets (SLR_LLM_BASE_URL, SLR_LLM_API_KEY,
SLR_LLM_MODEL)."""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .retrieval import ProviderDescriptor

PAUSE_POLICIES = ("auto", "pause_after_each_stage")

_FIXTURE_FIELD_MAP = {
    "title": "title",
    "authors": "authors",
    "url": "url",
    "venue": "venue",
    "doi": "doi",
    "paper_type": "paper_type",
    "affiliation_country": "affiliation_country",
    "affiliation_institution": "affiliation_institution",
    "year": "year",
    "abstract": "abstract",
}

# Descriptors shipped as data; the set is extensible through config.
BUILTIN_PROVIDERS = {
    "fixture": ProviderDescriptor(
        tag="fixture",
        base_url="fixture://local",
        dialect="url_keywords",
        page_size=10,
        rate_limit=1000.0,
        query_param="query",
        page_param="page",
        page_size_param="rows",
        year_start_param="from_year",
        year_end_param="until_year",
        items_path="items",
        next_page_path="next_page",
        field_map=dict(_FIXTURE_FIELD_MAP),
    ),
    "crossref": ProviderDescriptor(
        tag="crossref",
        base_url="https://api.crossref.org/works",
        dialect="canonical",
        page_size=20,
        rate_limit=2.0,
        query_param="query.bibliographic",
        page_param="offset",
        page_size_param="rows",
        year_start_param="filter",
        year_end_param="filter",
        year_format="from-pub-date:{year}-01-01",
        year_end_format="until-pub-date:{year}-12-31",
        items_path="message.items",
        next_page_path="",
        field_map={
            "title": "title.0",
            "authors": "author",
            "url": "URL",
            "venue": "container-title.0",
            "doi": "DOI",
            "paper_type": "type",
            "year": "published.date-parts.0.0",
            "abstract": "abstract",
        },
    ),
    "openalex": ProviderDescriptor(
        tag="openalex",
        base_url="https://api.openalex.org/works",
        dialect="canonical",
        page_size=25,
        rate_limit=5.0,
        query_param="search",
        page_param="page",
        page_size_param="per-page",
        year_start_param="filter",
        year_end_param="filter",
        year_format="from_publication_date:{year}-01-01",
        year_end_format="to_publication_date:{year}-12-31",
        items_path="results",
        next_page_path="",
        field_map={
            "title": "title",
            "authors": "authorships",
            "url": "id",
            "venue": "primary_location.source.display_name",
            "doi": "doi",
            "paper_type": "type",
            "year": "publication_year",
            "affiliation_institution": "authorships.0.institutions.0.display_name",
            "affiliation_country": "authorships.0.institutions.0.country_code",
        },
    ),
}


@dataclass
class Config:
    llm_base_url: str = ""
    llm_api_key: str = ""
    llm_model: str = "default"
    llm_temperature_override: float | None = None
    runs_dir: Path = Path("runs")
    cache_dir: Path = Path("cache/llm")
    fixture_root: Path = Path("fixtures/providers")
    contact: str = ""
    max_records_default: int = 10
    in_flight: int = 4
    pause_policy: str = "auto"
    provider_tags: tuple = ("fixture",)
    providers: dict = field(default_factory=lambda: dict(BUILTIN_PROVIDERS))
    provider_transports: dict = field(default_factory=dict)  # tag -> http|fixture

    def enabled_providers(self):
        return [self.providers[tag] for tag in self.provider_tags]

    def transport_for(self, tag: str) -> str:
        if tag in self.provider_transports:
            return self.provider_transports[tag]
        return "fixture" if tag == "fixture" else "http"


def load_config(path=None) -> Config:
    cfg = Config()
    if path is not None:
        parser = configparser.ConfigParser()
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        if parser.has_section("llm"):
            sec = parser["llm"]
            cfg.llm_base_url = sec.get("base_url", cfg.llm_base_url)
            cfg.llm_model = sec.get("model", cfg.llm_model)
        if parser.has_section("store"):
            sec = parser["store"]
            cfg.runs_dir = Path(sec.get("runs_dir", str(cfg.runs_dir)))
            cfg.cache_dir = Path(sec.get("cache_dir", str(cfg.cache_dir)))
            cfg.fixture_root = Path(sec.get("fixture_root", str(cfg.fixture_root)))
        if parser.has_section("limits"):
            sec = parser["limits"]
            cfg.max_records_default = sec.getint("max_records", cfg.max_records_default)
            cfg.in_flight = sec.getint("in_flight", cfg.in_flight)
        if parser.has_section("run"):
            cfg.pause_policy = parser["run"].get("pause_policy", cfg.pause_policy)
        if parser.has_section("contact"):
            cfg.contact = parser["contact"].get("email", cfg.contact)
        if parser.has_section("providers"):
            enabled = parser["providers"].get("enabled", "")
            if enabled:
                cfg.provider_tags = tuple(t.strip() for t in enabled.split(",") if t.strip())
        for section in parser.sections():
            if not section.startswith("provider:"):
                continue
            tag = section.split(":", 1)[1]
            sec = dict(parser[section])
            transport = sec.pop("transport", None)
            if transport:
                cfg.provider_transports[tag] = transport
            base = BUILTIN_PROVIDERS.get(tag)
            data = {"tag": tag}
            if base is not None:
                data.update(
                    {k: getattr(base, k) for k in (
                        "base_url", "dialect", "page_size", "rate_limit",
                        "query_param", "page_param", "page_size_param",
                        "year_start_param", "year_end_param", "year_format",
                        "year_end_format", "extra_params", "items_path", "next_page_path",
                        "field_map", "defaults")}
                )
            for key, value in sec.items():
                if key in ("field_map", "defaults", "extra_params"):
                    data[key] = json.loads(value)
                elif key in ("page_size",):
                    data[key] = int(value)
                elif key in ("rate_limit",):
                    data[key] = float(value)
                else:
                    data[key] = value
            cfg.providers[tag] = ProviderDescriptor.from_dict(data)
    if cfg.pause_policy not in PAUSE_POLICIES:
        raise ValueError(f"unknown pause_policy: {cfg.pause_policy}")
    cfg.llm_base_url = os.environ.get("SLR_LLM_BASE_URL", cfg.llm_base_url)
    cfg.llm_api_key = os.environ.get("SLR_LLM_API_KEY", cfg.llm_api_key)
    cfg.llm_model = os.environ.get("SLR_LLM_MODEL", cfg.llm_model)
    return cfg
