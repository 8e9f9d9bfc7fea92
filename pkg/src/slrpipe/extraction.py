"""Extraction stage: per-record summaries, fulltext chunking, per-question
answers with grounded support quotes, and the tabular export."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass

from .domain import PaperRecord, ReviewProtocol
from .errors import InvalidParams, NoContent, SchemaViolation

log = logging.getLogger(__name__)

SUMMARY_WORD_CAP = 150
CHUNK_SIZE = 4000
CHUNK_OVERLAP = 200


@dataclass(frozen=True)
class ExtractionRecord:
    record_id: str
    summary: str
    answers: dict  # question id -> {answer, support_quote, confidence}

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "summary": self.summary,
            "answers": self.answers,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractionRecord":
        return cls(record_id=d["record_id"], summary=d["summary"], answers=d["answers"])


# ---------------------------------------------------------------------------
# Chunking


def chunk_text(text: str, max_size: int = CHUNK_SIZE,
               overlap: int = CHUNK_OVERLAP) -> list[str]:
    """Split into chunks of at most ``max_size`` chars where consecutive
    chunks share exactly ``overlap`` chars. Split points prefer a paragraph
    break, then a sentence break, within a tolerance window. Lossless:
    chunks[0] + each later chunk[overlap:] reconstructs the input."""
    if overlap < 0 or max_size <= overlap:
        raise InvalidParams(f"need max_size > overlap >= 0, got {max_size}, {overlap}")
    if len(text) <= max_size:
        return [text] if text else []
    # The snap window must leave room for progress past the overlap.
    window = min(200, max_size - overlap - 1)
    chunks = []
    pos = 0
    while True:
        end = pos + max_size
        if end >= len(text):
            chunks.append(text[pos:])
            return chunks
        slice_ = text[pos:end]
        cut = slice_.rfind("\n\n", max_size - window)
        if cut < 0:
            cut = slice_.rfind(". ", max_size - window)
            if cut >= 0:
                cut += 2  # keep the sentence terminator in this chunk
        else:
            cut += 2
        if cut > 0:
            end = pos + cut
        chunks.append(text[pos:end])
        pos = end - overlap


# ---------------------------------------------------------------------------
# Model-backed operations


def summarize(gateway, record: PaperRecord, cap: int = SUMMARY_WORD_CAP) -> str:
    if not record.abstract and not record.fulltext:
        raise NoContent(f"record {record.record_id} has no abstract or fulltext")
    content = record.abstract or record.fulltext
    result = gateway.call(
        "summarize", {"title": record.title, "content": content, "cap": str(cap)}
    )
    words = result.value["summary"].split()
    if len(words) > cap:
        return " ".join(words[:cap])
    return result.value["summary"]


def _format_questions(protocol: ReviewProtocol) -> str:
    return "\n".join(f"{q.id}: {q.text} (purpose: {q.purpose})" for q in protocol.questions)


def _call_extract(gateway, title, protocol, content) -> dict:
    result = gateway.call(
        "extract_answers",
        {"title": title, "questions": _format_questions(protocol), "content": content},
    )
    answers = result.value["answers"]
    expected = {q.id for q in protocol.questions}
    if set(answers) != expected:
        raise SchemaViolation(
            f"answers must cover exactly {sorted(expected)}, got {sorted(answers)}"
        )
    return answers


def extract_answers(gateway, record: PaperRecord, protocol: ReviewProtocol,
                    summary: str | None = None) -> ExtractionRecord:
    """Answer every research question for one record.

    Fulltext is chunked and per-chunk answers reduced by a merge call; a
    support quote that is not a verbatim substring of the record's text is
    stripped and the answer's confidence downgraded to low.
    """
    protocol.require_questions()
    if not record.abstract and not record.fulltext:
        raise NoContent(f"record {record.record_id} has no abstract or fulltext")
    if record.fulltext:
        chunks = chunk_text(record.fulltext)
    else:
        chunks = [record.abstract]
    per_chunk = [_call_extract(gateway, record.title, protocol, c) for c in chunks]
    if len(per_chunk) == 1:
        answers = per_chunk[0]
    else:
        combined = []
        for i, answers_i in enumerate(per_chunk, 1):
            for qid, a in answers_i.items():
                combined.append(f"[section {i}] {qid}: {a['answer']} "
                                f"(quote: {a['support_quote']!r})")
        answers = _call_extract(
            gateway,
            record.title,
            protocol,
            "Partial answers from paper sections to merge:\n" + "\n".join(combined),
        )
    source = (record.abstract or "") + "\n" + (record.fulltext or "")
    cleaned = {}
    for qid, a in answers.items():
        quote = a["support_quote"]
        confidence = a["confidence"]
        if quote and quote not in source:
            log.warning("stripping fabricated quote for %s/%s", record.record_id, qid)
            quote, confidence = "", "low"
        cleaned[qid] = {
            "answer": a["answer"],
            "support_quote": quote,
            "confidence": confidence,
        }
    if summary is None:
        summary = summarize(gateway, record)
    return ExtractionRecord(record_id=record.record_id, summary=summary, answers=cleaned)


# ---------------------------------------------------------------------------
# Tabulation


def tabulate(extractions, records_by_id: dict, protocol: ReviewProtocol) -> dict:
    """One row per extraction, one column per question; row order follows the
    extraction (inclusion) order."""
    qids = [q.id for q in protocol.questions]
    header = ["record_id", "title"] + qids
    rows = []
    for ext in extractions:
        record = records_by_id.get(ext.record_id)
        title = record.title if record else ""
        rows.append(
            [ext.record_id, title]
            + [ext.answers.get(qid, {}).get("answer", "") for qid in qids]
        )
    return {"header": header, "rows": rows}


def table_to_csv(table: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table["header"])
    writer.writerows(table["rows"])
    return buf.getvalue()
