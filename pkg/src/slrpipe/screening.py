"""Screening stage: deterministic keyword rules first, model judge where the
rules abstain, human overrides supreme."""

from __future__ import annotations

import logging

from .domain import (
    CriteriaSet,
    PaperRecord,
    ReviewProtocol,
    ScreeningDecision,
    effective_decisions,
    normalize_title,
)
from .errors import GatewayError, RunFinalized, UnknownDecision, ValidationError

log = logging.getLogger(__name__)

JUDGE_TEMPLATES = {"title": "screen_title", "abstract": "screen_abstract"}


def _normalize_stage_text(record: PaperRecord, stage: str) -> str:
    # Same normalization as titles so criteria match plural/punctuation variants.
    return normalize_title(record.text_for_stage(stage))


def criteria_text(criteria: CriteriaSet) -> str:
    lines = []
    if criteria.include_keywords:
        lines.append("Include when about: " + "; ".join(criteria.include_keywords))
    if criteria.exclude_keywords:
        lines.append("Exclude when about: " + "; ".join(criteria.exclude_keywords))
    if criteria.require_abstract:
        lines.append("Exclude records without an abstract.")
    return "\n".join(lines) or "No explicit criteria; judge topical relevance."


def apply_rules(record: PaperRecord, criteria: CriteriaSet,
                year_range=(None, None), stage: str = "title"):
    """Deterministic three-clause rule: exclusion beats inclusion beats abstain.

    Keywords match as substrings of the normalized stage text (title, or
    title + abstract), so "large language model" also matches its plural.
    Returns (verdict, rationale).
    """
    text = _normalize_stage_text(record, stage)
    for keyword in criteria.exclude_keywords:
        if normalize_title(keyword) in text:
            return "exclude", f"exclude_keyword: {keyword}"
    start, end = year_range
    if record.year is not None:
        if start is not None and record.year < start:
            return "exclude", f"year {record.year} before {start}"
        if end is not None and record.year > end:
            return "exclude", f"year {record.year} after {end}"
    if stage == "abstract" and criteria.require_abstract and not record.abstract:
        return "exclude", "abstract required but absent"
    for keyword in criteria.include_keywords:
        if normalize_title(keyword) in text:
            return "include", f"include_keyword: {keyword}"
    return "needs_judge", "no criteria keyword matched"


def screen_stage(records, protocol: ReviewProtocol, stage: str, gateway,
                 clock, persist) -> list[ScreeningDecision]:
    """One decision per record: rule verdict, with needs_judge escalated to
    the model judge. ``persist`` is called with each decision before return;
    a judge failure leaves the record needs_judge, never a silent verdict."""
    protocol.require_questions()
    decisions = []
    for record in records:
        verdict, rationale = apply_rules(
            record, protocol.criteria, protocol.year_range, stage
        )
        actor = "rule"
        if verdict == "needs_judge" and gateway is not None:
            try:
                verdict, rationale, actor = _judge(record, protocol, stage, gateway)
            except GatewayError as exc:
                log.warning("judge unavailable for %s: %s", record.record_id, exc)
                verdict, rationale, actor = "needs_judge", "judge unavailable", "rule"
        decision = ScreeningDecision(
            record_id=record.record_id,
            stage=stage,
            verdict=verdict,
            actor=actor,
            rationale=rationale,
            timestamp=clock.timestamp(),
        )
        persist(decision)
        decisions.append(decision)
    return decisions


def _judge(record, protocol, stage, gateway):
    variables = {
        "topic": protocol.topic,
        "title": record.title,
        "criteria": criteria_text(protocol.criteria),
    }
    if stage == "abstract":
        variables["abstract"] = record.abstract or ""
    result = gateway.call(JUDGE_TEMPLATES[stage], variables)
    return result.value["verdict"], result.value["rationale"], "model"


def included_ids(decisions, stage: str) -> list[str]:
    """record_ids effectively included at a stage, in decision order."""
    effective = effective_decisions(list(decisions), stage)
    return [rid for rid, d in effective.items() if d.verdict == "include"]


def apply_override(decisions, decision_id: str, verdict: str, rationale: str,
                   editor: str, clock, finalized: bool = False) -> ScreeningDecision:
    """Record a human verdict superseding the referenced decision."""
    if finalized:
        raise RunFinalized("run is finalized; overrides are closed")
    target = next((d for d in decisions if d.decision_id == decision_id), None)
    if target is None:
        raise UnknownDecision(f"no decision {decision_id!r}")
    if verdict not in ("include", "exclude"):
        raise ValidationError(f"human verdict must be include or exclude, got {verdict!r}")
    if not rationale.strip():
        raise ValidationError("override requires a rationale")
    return ScreeningDecision(
        record_id=target.record_id,
        stage=target.stage,
        verdict=verdict,
        actor="human",
        rationale=rationale,
        timestamp=clock.timestamp(),
    )
