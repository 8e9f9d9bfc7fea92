"""Synthesis stage: funnel accounting, per-question cross-paper synthesis,
trend/gap narrative, and deterministic report rendering."""

from __future__ import annotations

import logging

from . import querylang
from .domain import FunnelCounts, ReviewProtocol, effective_decisions
from .errors import SchemaViolation
from .screening import included_ids

log = logging.getLogger(__name__)

NO_EVIDENCE_SENTENCE = "No included study addressed this question."

TRENDS_QUESTION = "Overall trends and gaps across the included studies"


def compute_funnel(candidates, decisions, extractions) -> FunnelCounts:
    """Counts derived solely from persisted records and decisions.

    identified counts raw records before deduplication (each candidate's
    provenance lists every merged source), deduplicated counts candidates,
    and the screening counts come from effective decisions (human wins)."""
    abstract_included = set(included_ids(decisions, "abstract"))
    return FunnelCounts(
        identified=sum(len(r.provenance) for r in candidates),
        deduplicated=len(candidates),
        title_included=len(included_ids(decisions, "title")),
        abstract_included=len(abstract_included),
        final_included=len(
            [e for e in extractions if e.record_id in abstract_included]
        ),
    )


def synthesize_question(gateway, question_text: str, rows) -> dict:
    """Cross-paper synthesis for one question. ``rows`` are (record_id,
    answer text) pairs; cited ids are schema-restricted to the input rows."""
    if not rows:
        return {"synthesis": NO_EVIDENCE_SENTENCE, "gap_notes": "", "citations": []}
    allowed = [rid for rid, _ in rows]
    schema = {
        "type": "object",
        "required": ["synthesis", "gap_notes", "citations"],
        "properties": {
            "synthesis": {"type": "string", "minLength": 1},
            "gap_notes": {"type": "string"},
            "citations": {"type": "array", "items": {"enum": allowed}},
        },
        "additionalProperties": False,
    }
    evidence = "\n".join(f"[{rid}] {answer}" for rid, answer in rows)
    result = gateway.call(
        "synthesize", {"question": question_text, "evidence": evidence}, schema=schema
    )
    return result.value


def synthesize_all(gateway, protocol: ReviewProtocol, extractions) -> dict:
    """Per-question syntheses plus one trends-and-gaps narrative over them."""
    syntheses = {}
    for q in protocol.questions:
        rows = [
            (e.record_id, e.answers.get(q.id, {}).get("answer", ""))
            for e in extractions
            if e.answers.get(q.id, {}).get("answer")
        ]
        syntheses[q.id] = synthesize_question(gateway, q.text, rows)
    trend_rows = [
        (qid, s["synthesis"]) for qid, s in syntheses.items()
        if s["synthesis"] != NO_EVIDENCE_SENTENCE
    ]
    if trend_rows:
        trends = synthesize_question(gateway, TRENDS_QUESTION, trend_rows)
    else:
        trends = {"synthesis": NO_EVIDENCE_SENTENCE, "gap_notes": "", "citations": []}
    return {"questions": syntheses, "trends": trends}


# ---------------------------------------------------------------------------
# Report rendering


def _criteria_lines(protocol: ReviewProtocol) -> list[str]:
    c = protocol.criteria
    lines = []
    lines.append("- Include keywords: " + (", ".join(c.include_keywords) or "(none)"))
    lines.append("- Exclude keywords: " + (", ".join(c.exclude_keywords) or "(none)"))
    lines.append(f"- Abstract required: {'yes' if c.require_abstract else 'no'}")
    if c.language_allowlist:
        lines.append("- Languages: " + ", ".join(c.language_allowlist))
    return lines


def _md_escape(text: str) -> str:
    return str(text).replace("|", "\\|").replace("\n", " ")


def render_report_md(protocol: ReviewProtocol, funnel: FunnelCounts, candidates,
                     decisions, extractions, syntheses: dict,
                     audit_events) -> str:
    """Byte-stable Markdown report; timestamps appear only in the audit
    appendix, sourced from the event log."""
    included = {e.record_id for e in extractions}
    records_by_id = {r.record_id: r for r in candidates}
    lines = [f"# Systematic Literature Review: {protocol.topic}", ""]

    lines += ["## Protocol", ""]
    if protocol.objective:
        lines.append(f"Objective: {protocol.objective}")
        lines.append("")
    lines.append("Research questions:")
    for q in protocol.questions:
        lines.append(f"- **{q.id}**: {q.text}")
    lines.append("")
    query_text = querylang.print_query(protocol.query) if protocol.query else "(none)"
    lines.append(f'Search query: `{query_text}`')
    start, end = protocol.year_range
    if start is not None or end is not None:
        lines.append(f"Year range: {start or 'open'}\u2013{end or 'open'}")
    lines.append(f"Record cap: {protocol.max_records}")
    lines.append("")
    lines.append("Criteria:")
    lines += _criteria_lines(protocol)
    lines.append("")

    lines += ["## Funnel", ""]
    lines.append("| Stage | Count |")
    lines.append("| --- | --- |")
    for label, count in (
        ("Records identified", funnel.identified),
        ("After deduplication", funnel.deduplicated),
        ("Included after title screening", funnel.title_included),
        ("Included after abstract screening", funnel.abstract_included),
        ("Included in final synthesis", funnel.final_included),
    ):
        lines.append(f"| {label} | {count} |")
    lines.append("")

    lines += ["## Included studies", ""]
    cols = ["Title", "Authors", "URL", "Venue", "DOI", "Type", "Country", "Institution"]
    lines.append("| " + " | ".join(cols) + " |")
    lines.append("|" + " --- |" * len(cols))
    for ext in extractions:
        r = records_by_id.get(ext.record_id)
        if r is None:
            continue
        lines.append(
            "| "
            + " | ".join(
                _md_escape(v or "")
                for v in (
                    r.title,
                    "; ".join(r.authors),
                    r.url,
                    r.venue,
                    r.doi,
                    r.paper_type,
                    r.affiliation_country,
                    r.affiliation_institution,
                )
            )
            + " |"
        )
    lines.append("")

    lines += ["## Findings by research question", ""]
    for q in protocol.questions:
        synth = syntheses["questions"].get(q.id, {})
        lines.append(f"### {q.id}: {q.text}")
        lines.append("")
        lines.append(synth.get("synthesis", NO_EVIDENCE_SENTENCE))
        if synth.get("gap_notes"):
            lines.append("")
            lines.append(f"Gaps: {synth['gap_notes']}")
        if synth.get("citations"):
            lines.append("")
            lines.append("Cited records: " + ", ".join(synth["citations"]))
        lines.append("")

    trends = syntheses.get("trends", {})
    lines += ["## Trends and gaps", ""]
    lines.append(trends.get("synthesis", NO_EVIDENCE_SENTENCE))
    if trends.get("gap_notes"):
        lines.append("")
        lines.append(f"Gaps: {trends['gap_notes']}")
    lines.append("")

    lines += ["## Audit appendix", ""]
    audit = [e for e in audit_events if e.get("kind") in ("plan_edited", "decision_overridden")]
    if not audit:
        lines.append("No human edits or overrides were recorded.")
    else:
        for event in audit:
            payload = event.get("payload", {})
            lines.append(
                f"- {event.get('ts', '')} {event['kind']}: "
                + ", ".join(f"{k}={payload[k]!r}" for k in sorted(payload))
            )
    lines.append("")
    return "\n".join(lines)


def check_citation_closure(syntheses: dict, included_ids_set: set):
    for qid, synth in syntheses.get("questions", {}).items():
        foreign = [c for c in synth.get("citations", ()) if c not in included_ids_set]
        if foreign:
            raise SchemaViolation(f"synthesis for {qid} cites unknown records {foreign}")
