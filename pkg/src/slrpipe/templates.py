"""Prompt template library.

Every model call in the pipeline goes through one of these seven templates.
Each template fixes a body with named placeholders, a JSON schema the model
reply must satisfy, and a default temperature (0 where a judgment is made,
0.7 where text is drafted).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str
    output_schema: dict
    temperature: float

    @property
    def placeholders(self) -> frozenset[str]:
        return frozenset(PLACEHOLDER_RE.findall(self.body))


_SCREEN_SCHEMA = {
    "type": "object",
    "required": ["verdict", "rationale"],
    "properties": {
        "verdict": {"enum": ["include", "exclude"]},
        "rationale": {"type": "string", "minLength": 1},
    },
    "additionalProperties": False,
}

_ANSWER_SCHEMA = {
    "type": "object",
    "required": ["answer", "support_quote", "confidence"],
    "properties": {
        "answer": {"type": "string"},
        "support_quote": {"type": "string"},
        "confidence": {"enum": ["low", "medium", "high"]},
    },
    "additionalProperties": False,
}

TEMPLATES: dict[str, PromptTemplate] = {}


def _register(template_id, body, output_schema, temperature):
    TEMPLATES[template_id] = PromptTemplate(template_id, body, output_schema, temperature)


_register(
    "gen_questions",
    (
        "You are planning a systematic literature review.\n"
        "Topic: {topic}\n"
        "Objective: {objective}\n\n"
        "Write exactly {n} research questions for this review. Reply with a JSON "
        'object with one key "questions" holding an array of objects, each with '
        'keys "id" (RQ1, RQ2, ... in order), "text" (the question) and "purpose" '
        "(why the review asks it)."
    ),
    {
        "type": "object",
        "required": ["questions"],
        "properties": {
            "questions": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["id", "text", "purpose"],
                    "properties": {
                        "id": {"type": "string", "pattern": "^RQ[0-9]+$"},
                        "text": {"type": "string", "minLength": 1},
                        "purpose": {"type": "string", "minLength": 1},
                    },
                },
            }
        },
        "additionalProperties": False,
    },
    0.7,
)

_register(
    "gen_query",
    (
        "You are planning a systematic literature review.\n"
        "Topic: {topic}\n"
        "Research questions:\n{questions}\n"
        "{feedback}\n"
        "Write one Boolean search string for academic databases. Operators AND, "
        "OR, NOT; double quotes around multi-word phrases; parentheses to group. "
        'Reply with a JSON object with one key "query" holding the search string.'
    ),
    {
        "type": "object",
        "required": ["query"],
        "properties": {"query": {"type": "string", "minLength": 1}},
        "additionalProperties": False,
    },
    0.7,
)

_register(
    "screen_title",
    (
        "You are screening papers for a systematic literature review on: {topic}\n"
        "Inclusion/exclusion criteria:\n{criteria}\n\n"
        "Paper title: {title}\n\n"
        "Decide from the title alone whether this paper belongs in the review. "
        'Reply with a JSON object with keys "verdict" ("include" or "exclude") '
        'and "rationale".'
    ),
    _SCREEN_SCHEMA,
    0.0,
)

_register(
    "screen_abstract",
    (
        "You are screening papers for a systematic literature review on: {topic}\n"
        "Inclusion/exclusion criteria:\n{criteria}\n\n"
        "Paper title: {title}\n"
        "Abstract: {abstract}\n\n"
        "Decide from the abstract whether this paper belongs in the review. "
        'Reply with a JSON object with keys "verdict" ("include" or "exclude") '
        'and "rationale".'
    ),
    _SCREEN_SCHEMA,
    0.0,
)

_register(
    "summarize",
    (
        "Summarize the following paper content in at most {cap} words.\n"
        "Title: {title}\n"
        "Content:\n{content}\n\n"
        'Reply with a JSON object with one key "summary".'
    ),
    {
        "type": "object",
        "required": ["summary"],
        "properties": {"summary": {"type": "string", "minLength": 1}},
        "additionalProperties": False,
    },
    0.7,
)

_register(
    "extract_answers",
    (
        "You are extracting data for a systematic literature review.\n"
        "Paper title: {title}\n"
        "Research questions:\n{questions}\n\n"
        "Source text:\n{content}\n\n"
        "Answer every research question from the source text. Reply with a JSON "
        'object with one key "answers" mapping each question id to an object '
        'with keys "answer", "support_quote" (a verbatim excerpt from the source '
        'text, or empty) and "confidence" ("low", "medium" or "high").'
    ),
    {
        "type": "object",
        "required": ["answers"],
        "properties": {
            "answers": {
                "type": "object",
                "additionalProperties": _ANSWER_SCHEMA,
            }
        },
        "additionalProperties": False,
    },
    0.0,
)

_register(
    "synthesize",
    (
        "You are synthesizing findings for a systematic literature review.\n"
        "Question: {question}\n"
        "Evidence from included studies:\n{evidence}\n\n"
        "Write a short synthesis across studies, note gaps in the literature, "
        "and cite the record ids of the studies you draw on. Reply with a JSON "
        'object with keys "synthesis", "gap_notes" and "citations" (array of '
        "record ids drawn from the evidence)."
    ),
    {
        "type": "object",
        "required": ["synthesis", "gap_notes", "citations"],
        "properties": {
            "synthesis": {"type": "string", "minLength": 1},
            "gap_notes": {"type": "string"},
            "citations": {"type": "array", "items": {"type": "string"}},
        },
        "additionalProperties": False,
    },
    0.7,
)

TEMPLATE_IDS = tuple(TEMPLATES)
