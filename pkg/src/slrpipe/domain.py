"""Shared value types and pure functions: protocol, records, decisions,
funnel counts, feedback. No I/O here; everything is an immutable value with
a JSON wire form (snake_case) used by the run store and the HTTP API."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

from . import querylang
from .errors import NotEquivalent, ValidationError
from .querylang import QueryAst

SCREENING_STAGES = ("title", "abstract", "fulltext")
VERDICTS = ("include", "exclude", "needs_judge")
ACTORS = ("rule", "model", "human")
REPLICATION_MODES = ("paper_faithful", "extended")

# Six-point satisfaction scale, in order.
FEEDBACK_RATINGS = (
    "Not Satisfied",
    "Fair",
    "Satisfactory",
    "Good",
    "Very Good",
    "Excellent",
)


# ---------------------------------------------------------------------------
# Text / identifier normalization


def normalize_title(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace. Idempotent."""
    out = []
    for ch in text.lower():
        out.append(ch if ch.isalnum() else " ")
    return " ".join("".join(out).split())


def normalize_doi(doi: str | None) -> str | None:
    """Lowercase and strip resolver prefixes; DOIs are case-insensitive."""
    if doi is None:
        return None
    doi = doi.strip().lower()
    for prefix in ("https://doi.org/", "http://doi.org/",
                   "https://dx.doi.org/", "http://dx.doi.org/", "doi:"):
        if doi.startswith(prefix):
            doi = doi[len(prefix):]
    return doi or None


def make_record_id(title: str, doi: str | None) -> str:
    """Content hash of (normalized title, doi-or-empty); stable across resumes."""
    key = normalize_title(title) + "\x1f" + (normalize_doi(doi) or "")
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Research questions and criteria


@dataclass(frozen=True)
class ResearchQuestion:
    id: str
    text: str
    purpose: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError(f"question {self.id}: text is empty")

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text, "purpose": self.purpose}

    @classmethod
    def from_dict(cls, d: dict) -> "ResearchQuestion":
        return cls(id=d["id"], text=d["text"], purpose=d.get("purpose", ""))


@dataclass(frozen=True)
class CriteriaSet:
    include_keywords: tuple[str, ...] = ()
    exclude_keywords: tuple[str, ...] = ()
    require_abstract: bool = False
    language_allowlist: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "include_keywords", tuple(self.include_keywords))
        object.__setattr__(self, "exclude_keywords", tuple(self.exclude_keywords))
        object.__setattr__(self, "language_allowlist", tuple(self.language_allowlist))
        overlap = set(self.include_keywords) & set(self.exclude_keywords)
        if overlap:
            raise ValidationError(
                f"keywords in both include and exclude lists: {sorted(overlap)}"
            )

    def to_dict(self) -> dict:
        return {
            "include_keywords": list(self.include_keywords),
            "exclude_keywords": list(self.exclude_keywords),
            "require_abstract": self.require_abstract,
            "language_allowlist": list(self.language_allowlist),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CriteriaSet":
        return cls(
            include_keywords=tuple(d.get("include_keywords", ())),
            exclude_keywords=tuple(d.get("exclude_keywords", ())),
            require_abstract=bool(d.get("require_abstract", False)),
            language_allowlist=tuple(d.get("language_allowlist", ())),
        )


@dataclass(frozen=True)
class ReviewProtocol:
    topic: str
    objective: str = ""
    questions: tuple[ResearchQuestion, ...] = ()
    query: QueryAst | None = None
    year_range: tuple[int | None, int | None] = (None, None)
    max_records: int = 10
    criteria: CriteriaSet = field(default_factory=CriteriaSet)
    replication_mode: str = "paper_faithful"

    def __post_init__(self):
        object.__setattr__(self, "questions", tuple(self.questions))
        object.__setattr__(self, "year_range", tuple(self.year_range))
        if not self.topic.strip():
            raise ValidationError("protocol topic is empty")
        if self.max_records < 1:
            raise ValidationError("max_records must be >= 1")
        if self.replication_mode not in REPLICATION_MODES:
            raise ValidationError(f"unknown replication_mode: {self.replication_mode}")
        start, end = self.year_range
        if start is not None and end is not None and start > end:
            raise ValidationError(f"year_range start {start} > end {end}")
        ids = [q.id for q in self.questions]
        if len(ids) != len(set(ids)):
            raise ValidationError("duplicate research question ids")

    def require_questions(self):
        if not self.questions:
            raise ValidationError("protocol has no research questions")

    def to_dict(self) -> dict:
        return {
            "topic": self.topic,
            "objective": self.objective,
            "questions": [q.to_dict() for q in self.questions],
            "query": querylang.ast_to_dict(self.query) if self.query else None,
            "year_range": {"start": self.year_range[0], "end": self.year_range[1]},
            "max_records": self.max_records,
            "criteria": self.criteria.to_dict(),
            "replication_mode": self.replication_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReviewProtocol":
        yr = d.get("year_range") or {}
        if isinstance(yr, (list, tuple)):
            yr = {"start": yr[0], "end": yr[1]}
        query = d.get("query")
        if isinstance(query, str):
            query = querylang.parse_query(query)
        elif query is not None:
            query = querylang.ast_from_dict(query)
        return cls(
            topic=d["topic"],
            objective=d.get("objective", ""),
            questions=tuple(
                ResearchQuestion.from_dict(q) for q in d.get("questions", ())
            ),
            query=query,
            year_range=(yr.get("start"), yr.get("end")),
            max_records=int(d.get("max_records", 10)),
            criteria=CriteriaSet.from_dict(d.get("criteria", {})),
            replication_mode=d.get("replication_mode", "paper_faithful"),
        )


# ---------------------------------------------------------------------------
# Bibliographic records


@dataclass(frozen=True)
class PaperRecord:
    record_id: str
    title: str
    authors: tuple[str, ...] = ()
    url: str = ""
    venue: str = ""
    doi: str | None = None
    paper_type: str = ""
    affiliation_country: str | None = None
    affiliation_institution: str | None = None
    year: int | None = None
    abstract: str | None = None
    fulltext: str | None = None
    source_provider: str = ""
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "authors", tuple(self.authors))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        object.__setattr__(self, "doi", normalize_doi(self.doi))
        if self.doi is not None and not self.doi.startswith("10."):
            raise ValidationError(f"malformed DOI: {self.doi}")
        if not self.provenance:
            raise ValidationError("record provenance is empty")

    @classmethod
    def build(cls, title: str, doi: str | None = None, **kwargs) -> "PaperRecord":
        """Construct with a content-derived record_id."""
        return cls(record_id=make_record_id(title, doi), title=title, doi=doi, **kwargs)

    def text_for_stage(self, stage: str) -> str:
        """The text a screening stage judges: title, or title + abstract."""
        if stage == "title":
            return self.title
        return self.title + "\n" + (self.abstract or "")

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "title": self.title,
            "authors": list(self.authors),
            "url": self.url,
            "venue": self.venue,
            "doi": self.doi,
            "paper_type": self.paper_type,
            "affiliation_country": self.affiliation_country,
            "affiliation_institution": self.affiliation_institution,
            "year": self.year,
            "abstract": self.abstract,
            "fulltext": self.fulltext,
            "source_provider": self.source_provider,
            "provenance": list(self.provenance),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PaperRecord":
        return cls(
            record_id=d["record_id"],
            title=d["title"],
            authors=tuple(d.get("authors", ())),
            url=d.get("url", ""),
            venue=d.get("venue", ""),
            doi=d.get("doi"),
            paper_type=d.get("paper_type", ""),
            affiliation_country=d.get("affiliation_country"),
            affiliation_institution=d.get("affiliation_institution"),
            year=d.get("year"),
            abstract=d.get("abstract"),
            fulltext=d.get("fulltext"),
            source_provider=d.get("source_provider", ""),
            provenance=tuple(d.get("provenance", ())),
        )


def records_equivalent(a: PaperRecord, b: PaperRecord) -> bool:
    """DOI equality is authoritative; otherwise normalized-title equality with
    compatible years (equal, or either absent)."""
    if a.doi is not None and b.doi is not None:
        return a.doi == b.doi
    ta, tb = normalize_title(a.title), normalize_title(b.title)
    if not ta or ta != tb:
        return False
    return a.year is None or b.year is None or a.year == b.year


def merge_records(a: PaperRecord, b: PaperRecord) -> PaperRecord:
    """Field-wise union preferring a's non-empty values; provenance concatenates."""
    if not records_equivalent(a, b):
        raise NotEquivalent(f"records {a.record_id} and {b.record_id} are not duplicates")

    def pick(x, y):
        return x if x not in (None, "", ()) else y

    title = pick(a.title, b.title)
    doi = pick(a.doi, b.doi)
    return PaperRecord(
        record_id=make_record_id(title, doi),
        title=title,
        authors=pick(a.authors, b.authors),
        url=pick(a.url, b.url),
        venue=pick(a.venue, b.venue),
        doi=doi,
        paper_type=pick(a.paper_type, b.paper_type),
        affiliation_country=pick(a.affiliation_country, b.affiliation_country),
        affiliation_institution=pick(a.affiliation_institution, b.affiliation_institution),
        year=pick(a.year, b.year),
        abstract=pick(a.abstract, b.abstract),
        fulltext=pick(a.fulltext, b.fulltext),
        source_provider=pick(a.source_provider, b.source_provider),
        provenance=a.provenance + b.provenance,
    )


# ---------------------------------------------------------------------------
# Decisions, funnel, feedback


@dataclass(frozen=True)
class ScreeningDecision:
    record_id: str
    stage: str
    verdict: str
    actor: str
    rationale: str
    timestamp: str

    def __post_init__(self):
        if self.stage not in SCREENING_STAGES:
            raise ValidationError(f"unknown screening stage: {self.stage}")
        if self.verdict not in VERDICTS:
            raise ValidationError(f"unknown verdict: {self.verdict}")
        if self.actor not in ACTORS:
            raise ValidationError(f"unknown actor: {self.actor}")
        if self.verdict == "exclude" and not self.rationale.strip():
            raise ValidationError("exclude verdict requires a rationale")

    @property
    def decision_id(self) -> str:
        return f"{self.stage}:{self.record_id}"

    def to_dict(self) -> dict:
        return {
            "decision_id": self.decision_id,
            "record_id": self.record_id,
            "stage": self.stage,
            "verdict": self.verdict,
            "actor": self.actor,
            "rationale": self.rationale,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScreeningDecision":
        return cls(
            record_id=d["record_id"],
            stage=d["stage"],
            verdict=d["verdict"],
            actor=d["actor"],
            rationale=d.get("rationale", ""),
            timestamp=d.get("timestamp", ""),
        )


def effective_decisions(
    decisions: list[ScreeningDecision], stage: str
) -> dict[str, ScreeningDecision]:
    """Latest decision per record at a stage, with human decisions superseding
    every non-human one regardless of order."""
    out: dict[str, ScreeningDecision] = {}
    for d in decisions:
        if d.stage != stage:
            continue
        prev = out.get(d.record_id)
        if prev is not None and prev.actor == "human" and d.actor != "human":
            continue
        out[d.record_id] = d
    return out


@dataclass(frozen=True)
class FunnelCounts:
    identified: int
    deduplicated: int
    title_included: int
    abstract_included: int
    final_included: int

    def __post_init__(self):
        chain = (
            self.identified,
            self.deduplicated,
            self.title_included,
            self.abstract_included,
            self.final_included,
        )
        if any(c < 0 for c in chain):
            raise ValidationError("funnel counts must be non-negative")
        if any(chain[i] < chain[i + 1] for i in range(len(chain) - 1)):
            raise ValidationError(f"funnel chain not monotonic: {chain}")

    def to_dict(self) -> dict:
        return {
            "identified": self.identified,
            "deduplicated": self.deduplicated,
            "title_included": self.title_included,
            "abstract_included": self.abstract_included,
            "final_included": self.final_included,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FunnelCounts":
        return cls(**{k: int(d[k]) for k in (
            "identified", "deduplicated", "title_included",
            "abstract_included", "final_included")})


@dataclass(frozen=True)
class FeedbackEntry:
    run_id: str
    rating: str
    comment: str = ""
    role: str = ""

    def __post_init__(self):
        if self.rating not in FEEDBACK_RATINGS:
            # Distinct error type so the endpoint can map it cleanly.
            from .errors import UnknownRating

            raise UnknownRating(
                f"rating must be one of {list(FEEDBACK_RATINGS)}, got {self.rating!r}"
            )

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "rating": self.rating,
            "comment": self.comment,
            "role": self.role,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackEntry":
        return cls(
            run_id=d.get("run_id", ""),
            rating=d["rating"],
            comment=d.get("comment", ""),
            role=d.get("role", ""),
        )


__all__ = [
    "ACTORS",
    "FEEDBACK_RATINGS",
    "REPLICATION_MODES",
    "SCREENING_STAGES",
    "VERDICTS",
    "CriteriaSet",
    "FeedbackEntry",
    "FunnelCounts",
    "PaperRecord",
    "ResearchQuestion",
    "ReviewProtocol",
    "ScreeningDecision",
    "effective_decisions",
    "make_record_id",
    "merge_records",
    "normalize_doi",
    "normalize_title",
    "records_equivalent",
    "replace",
]
