import json

import pytest

from slrpipe import planner
from slrpipe.domain import ResearchQuestion, ReviewProtocol
from slrpipe.errors import SchemaViolation, ValidationError
from slrpipe.gateway import Gateway, MockProvider
from slrpipe.querylang import And, Or, Phrase, parse_query, print_query

RQ_TEXTS = [
    "How are large language models utilized in the software development lifecycle?",
    "What are the challenges of using large language models in software development?",
]


def questions_response(ids=("RQ1", "RQ2"), texts=RQ_TEXTS, purpose="scope the field"):
    return json.dumps({"questions": [
        {"id": i, "text": t, "purpose": purpose} for i, t in zip(ids, texts)
    ]})


def gw(entries, tmp_path):
    return Gateway(MockProvider({"entries": entries}), cache_dir=tmp_path / "cache")


def gen_entry(responses, match=None, repeat=False):
    return {"template_id": "gen_questions", "match": match or {},
            "responses": responses, "repeat": repeat}


def query_entry(responses, match=None, repeat=False):
    return {"template_id": "gen_query", "match": match or {},
            "responses": responses, "repeat": repeat}


TWO_QS = [ResearchQuestion("RQ1", RQ_TEXTS[0], "p"),
          ResearchQuestion("RQ2", RQ_TEXTS[1], "p")]


class TestGenerateQuestions:
    def test_happy_path(self, tmp_path):
        gateway = gw([gen_entry([questions_response()])], tmp_path)
        qs = planner.generate_questions(gateway, "llms in software dev", "obj", 2)
        assert [q.id for q in qs] == ["RQ1", "RQ2"]
        assert qs[0].text == RQ_TEXTS[0]

    def test_wrong_count_rejected(self, tmp_path):
        three = json.dumps({"questions": [
            {"id": f"RQ{i}", "text": "t?", "purpose": "p"} for i in (1, 2, 3)
        ]})
        gateway = gw([gen_entry([three, three, three])], tmp_path)
        with pytest.raises(SchemaViolation):
            planner.generate_questions(gateway, "topic", "", 2)

    def test_misnumbered_ids_rejected(self, tmp_path):
        gateway = gw([gen_entry([questions_response(ids=("RQ1", "RQ3"))])], tmp_path)
        with pytest.raises(SchemaViolation):
            planner.generate_questions(gateway, "topic", "", 2)

    def test_blank_purpose_rejected(self, tmp_path):
        gateway = gw([gen_entry([questions_response(purpose="  ")])], tmp_path)
        with pytest.raises(SchemaViolation):
            planner.generate_questions(gateway, "topic", "", 2)

    @pytest.mark.parametrize("n", [1, 7])
    def test_count_bounds(self, tmp_path, n):
        gateway = gw([], tmp_path)
        with pytest.raises(ValidationError):
            planner.generate_questions(gateway, "topic", "", n)

    def test_empty_topic(self, tmp_path):
        with pytest.raises(ValidationError):
            planner.generate_questions(gw([], tmp_path), "   ", "", 2)


class TestGenerateQuery:
    def test_paper_faithful_accepts_or_only(self, tmp_path):
        gateway = gw([query_entry([json.dumps(
            {"query": "large language models OR software development"})])], tmp_path)
        ast = planner.generate_search_query(gateway, "topic", TWO_QS, "paper_faithful")
        assert ast == Or((Phrase("large language models"),
                          Phrase("software development")))
        assert print_query(ast) == '"large language models" OR "software development"'

    def test_extended_reprompts_until_and(self, tmp_path):
        gateway = gw([
            query_entry([json.dumps({"query": "a OR b"})], match={"feedback": ""}),
            query_entry(
                [json.dumps({"query": '"large language models" AND testing'})],
                match={"feedback": "no AND"}),
        ], tmp_path)
        ast = planner.generate_search_query(gateway, "topic", TWO_QS, "extended")
        assert isinstance(ast, And)

    def test_extended_gives_up_after_budget(self, tmp_path, caplog):
        or_only = json.dumps({"query": "a OR b"})
        gateway = gw([query_entry([or_only] * 3)], tmp_path)
        with caplog.at_level("WARNING"):
            ast = planner.generate_search_query(gateway, "topic", TWO_QS, "extended")
        assert ast == parse_query("a OR b")
        assert any("re-prompt" in r.message for r in caplog.records)

    def test_requires_questions(self, tmp_path):
        with pytest.raises(ValidationError):
            planner.generate_search_query(gw([], tmp_path), "topic", [])


class TestBuildProtocol:
    def test_end_to_end(self, tmp_path):
        gateway = gw([
            gen_entry([questions_response()]),
            query_entry([json.dumps(
                {"query": "large language models OR software development"})]),
        ], tmp_path)
        protocol = planner.build_protocol(gateway, "llms in software dev",
                                          "objective", 2, "paper_faithful",
                                          max_records=10)
        assert len(protocol.questions) == 2
        assert protocol.max_records == 10
        assert print_query(protocol.query) == (
            '"large language models" OR "software development"')


class TestPlanEdit:
    @pytest.fixture
    def protocol(self):
        return ReviewProtocol(topic="t", questions=tuple(TWO_QS),
                              query=parse_query("a OR b"), max_records=10)

    def test_query_edit_reparsed_and_audited(self, protocol):
        events = []
        updated = planner.apply_plan_edit(
            protocol,
            {"field": "query", "value": '"code review" AND llm', "editor": "alice"},
            event_sink=lambda kind, payload: events.append((kind, payload)),
        )
        assert isinstance(updated.query, And)
        assert events == [("plan_edited", {
            "field": "query", "old": "a OR b",
            "new": '"code review" AND llm', "editor": "alice",
        })]

    def test_year_range_edit(self, protocol):
        updated = planner.apply_plan_edit(
            protocol, {"field": "year_range", "value": {"start": 2020, "end": 2023}})
        assert updated.year_range == (2020, 2023)

    def test_invalid_edit_rejected_before_recording(self, protocol):
        events = []
        with pytest.raises(ValidationError):
            planner.apply_plan_edit(
                protocol, {"field": "max_records", "value": 0},
                event_sink=lambda *a: events.append(a))
        assert events == []

    def test_uneditable_field(self, protocol):
        with pytest.raises(ValidationError):
            planner.apply_plan_edit(protocol, {"field": "topic", "value": "x"})

    def test_bad_query_text_raises_syntax_error(self, protocol):
        from slrpipe.errors import QuerySyntaxError
        with pytest.raises(QuerySyntaxError):
            planner.apply_plan_edit(protocol, {"field": "query", "value": "(a OR"})
