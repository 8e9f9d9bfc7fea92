"""Planning stage: research questions with purposes, Boolean search query,
and audited human edits to the protocol."""

from __future__ import annotations

import logging
from dataclasses import replace

from . import querylang
from .domain import CriteriaSet, ResearchQuestion, ReviewProtocol
from .errors import SchemaViolation, ValidationError
from .querylang import And

log = logging.getLogger(__name__)

# How many times generate_search_query re-asks for an AND-bearing query in
# extended mode before accepting with a warning.
QUERY_PROMPT_BUDGET = 2

EDITABLE_FIELDS = ("questions", "query", "year_range", "max_records", "criteria")


def _format_questions(questions) -> str:
    return "\n".join(f"{q.id}: {q.text} (purpose: {q.purpose})" for q in questions)


def generate_questions(gateway, topic: str, objective: str, n: int = 2):
    """Ask the model for exactly ``n`` research questions, ids RQ1..RQn."""
    if not topic.strip():
        raise ValidationError("topic is empty")
    if not 2 <= n <= 6:
        raise ValidationError("question count must be between 2 and 6")
    result = gateway.call(
        "gen_questions", {"topic": topic, "objective": objective, "n": str(n)}
    )
    items = result.value["questions"]
    if len(items) != n:
        raise SchemaViolation(f"expected {n} questions, model returned {len(items)}")
    expected_ids = [f"RQ{i}" for i in range(1, n + 1)]
    got_ids = [item["id"] for item in items]
    if got_ids != expected_ids:
        raise SchemaViolation(f"question ids must be {expected_ids}, got {got_ids}")
    questions = []
    for item in items:
        if not item["purpose"].strip():
            raise SchemaViolation(f"question {item['id']} has an empty purpose")
        questions.append(
            ResearchQuestion(id=item["id"], text=item["text"], purpose=item["purpose"])
        )
    return questions


def _contains_and(ast) -> bool:
    if isinstance(ast, And):
        return True
    children = getattr(ast, "children", None)
    if children:
        return any(_contains_and(c) for c in children)
    child = getattr(ast, "child", None)
    return _contains_and(child) if child is not None else False


def generate_search_query(gateway, topic: str, questions,
                          mode: str = "paper_faithful"):
    """Model emits a search string; parsed and normalized here.

    In extended mode the planner re-asks until the query contains an AND
    (full Boolean structure) or the prompt budget runs out, then accepts the
    last query with a logged warning.
    """
    if not questions:
        raise ValidationError("cannot generate a query without research questions")
    variables = {
        "topic": topic,
        "questions": _format_questions(questions),
        "feedback": "",
    }
    result = gateway.call("gen_query", variables)
    ast = querylang.parse_query(result.value["query"])
    if mode == "paper_faithful":
        return ast
    attempts = 0
    while not _contains_and(ast) and attempts < QUERY_PROMPT_BUDGET:
        attempts += 1
        variables = dict(
            variables,
            feedback=(
                f"Attempt {attempts}: the previous query used no AND operator. "
                "Combine distinct concepts with AND to narrow the search."
            ),
        )
        result = gateway.call("gen_query", variables)
        ast = querylang.parse_query(result.value["query"])
    if not _contains_and(ast):
        log.warning(
            "accepting OR-only query after %d re-prompts: %s",
            attempts,
            querylang.print_query(ast),
        )
    return ast


def build_protocol(gateway, topic: str, objective: str = "", n_questions: int = 2,
                   mode: str = "paper_faithful", **protocol_kwargs) -> ReviewProtocol:
    """Full planning pass: questions then query, returning a valid protocol."""
    questions = generate_questions(gateway, topic, objective, n_questions)
    query = generate_search_query(gateway, topic, questions, mode)
    return ReviewProtocol(
        topic=topic,
        objective=objective,
        questions=tuple(questions),
        query=query,
        replication_mode=mode,
        **protocol_kwargs,
    )


def apply_plan_edit(protocol: ReviewProtocol, edit: dict, event_sink=None) -> ReviewProtocol:
    """Apply one human edit to the protocol; emits an audit event.

    ``edit`` carries ``field``, ``value`` and ``editor``. Query edits are
    given as text and re-parsed; any invariant break raises before anything
    is recorded.
    """
    field_name = edit["field"]
    if field_name not in EDITABLE_FIELDS:
        raise ValidationError(f"field not editable: {field_name}")
    value = edit["value"]
    old = getattr(protocol, field_name)

    if field_name == "query":
        new_value = querylang.parse_query(value) if isinstance(value, str) else value
        old_repr = querylang.print_query(old) if old else None
        new_repr = querylang.print_query(new_value)
    elif field_name == "questions":
        new_value = tuple(
            q if isinstance(q, ResearchQuestion) else ResearchQuestion.from_dict(q)
            for q in value
        )
        old_repr = [q.to_dict() for q in old]
        new_repr = [q.to_dict() for q in new_value]
    elif field_name == "criteria":
        new_value = value if isinstance(value, CriteriaSet) else CriteriaSet.from_dict(value)
        old_repr = old.to_dict()
        new_repr = new_value.to_dict()
    elif field_name == "year_range":
        if isinstance(value, dict):
            new_value = (value.get("start"), value.get("end"))
        else:
            new_value = tuple(value)
        old_repr = list(old)
        new_repr = list(new_value)
    else:  # max_records
        new_value = int(value)
        old_repr = old
        new_repr = new_value

    updated = replace(protocol, **{field_name: new_value})  # validates invariants
    if event_sink is not None:
        event_sink(
            "plan_edited",
            {
                "field": field_name,
                "old": old_repr,
                "new": new_repr,
                "editor": edit.get("editor", ""),
            },
        )
    return updated
