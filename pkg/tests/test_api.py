import json

import pytest
from fastapi.testclient import TestClient

from slrpipe.api import create_app
from slrpipe.domain import FEEDBACK_RATINGS

from conftest import FIXTURES, make_orchestrator

EXPECTED_FUNNEL = {"identified": 10, "deduplicated": 10, "title_included": 3,
                   "abstract_included": 3, "final_included": 3}


@pytest.fixture
def protocol_doc():
    with open(FIXTURES / "demo_protocol.json", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture
def client(tmp_path):
    orch = make_orchestrator(tmp_path, pause_policy="pause_after_each_stage")
    return TestClient(create_app(orch))


def create_run(client, protocol_doc):
    resp = client.post("/api/runs", json=protocol_doc)
    assert resp.status_code == 201
    body = resp.json()
    assert body["schema_version"] == "1"
    return body["run_id"]


def advance(client, run_id, times=1):
    for _ in range(times):
        resp = client.post(f"/api/runs/{run_id}/advance")
        assert resp.status_code == 200, resp.text
    return resp.json()


class TestLifecycle:
    def test_create_list_get(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        listing = client.get("/api/runs").json()
        assert [r["run_id"] for r in listing["runs"]] == [run_id]
        state = client.get(f"/api/runs/{run_id}").json()
        assert state["status"] == "created"
        assert state["schema_version"] == "1"

    def test_full_run_via_api(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        result = advance(client, run_id, times=7)
        assert result["finalized"] is True
        state = client.get(f"/api/runs/{run_id}").json()
        assert state["funnel"] == EXPECTED_FUNNEL

    def test_advance_finalized_run_409(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        advance(client, run_id, times=7)
        resp = client.post(f"/api/runs/{run_id}/advance")
        assert resp.status_code == 409

    def test_unknown_run_404(self, client):
        assert client.get("/api/runs/run-missing").status_code == 404
        assert client.post("/api/runs/run-missing/advance").status_code == 404


class TestErrors:
    def test_oversized_body_413(self, client):
        big = "x" * ((1 << 20) + 1)
        resp = client.post("/api/runs", content=big.encode(),
                           headers={"Content-Type": "application/json",
                                    "Content-Length": str(len(big))})
        assert resp.status_code == 413

    def test_invalid_query_edit_422_with_offset(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        advance(client, run_id)
        resp = client.patch(f"/api/runs/{run_id}/protocol",
                            json={"field": "query", "value": "(llm OR"})
        assert resp.status_code == 422
        body = resp.json()
        assert body["offset"] == len("(llm OR")
        assert body["expected"]

    def test_invalid_protocol_422(self, client, protocol_doc):
        bad = dict(protocol_doc, max_records=0)
        resp = client.post("/api/runs", json=bad)
        assert resp.status_code == 422

    def test_override_unknown_decision_404(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        advance(client, run_id, times=3)
        resp = client.post(f"/api/runs/{run_id}/decisions/title:ghost/override",
                           json={"verdict": "include", "rationale": "r"})
        assert resp.status_code == 404

    def test_override_without_rationale_422(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        advance(client, run_id, times=3)
        decisions = client.get(f"/api/runs/{run_id}/decisions").json()["decisions"]
        resp = client.post(
            f"/api/runs/{run_id}/decisions/{decisions[0]['stage']}:"
            f"{decisions[0]['record_id']}/override",
            json={"verdict": "exclude"})
        assert resp.status_code == 422


class TestArtifacts:
    def test_candidates_and_decisions(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        advance(client, run_id, times=3)
        candidates = client.get(f"/api/runs/{run_id}/candidates").json()["candidates"]
        decisions = client.get(f"/api/runs/{run_id}/decisions").json()["decisions"]
        assert len(candidates) == 10
        assert len(decisions) == 10
        assert {d["stage"] for d in decisions} == {"title"}

    def test_report_flow(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        resp = client.get(f"/api/runs/{run_id}/report")
        assert resp.status_code == 409  # not generated yet
        advance(client, run_id, times=7)
        resp = client.get(f"/api/runs/{run_id}/report")
        assert resp.status_code == 200
        assert resp.headers["content-type"].startswith("text/markdown")
        assert resp.text.startswith("# Systematic Literature Review:")

    def test_override_then_funnel_shift(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        advance(client, run_id, times=3)
        decisions = client.get(f"/api/runs/{run_id}/decisions").json()["decisions"]
        excluded = next(d for d in decisions if d["verdict"] == "exclude")
        resp = client.post(
            f"/api/runs/{run_id}/decisions/title:{excluded['record_id']}/override",
            json={"verdict": "include", "rationale": "relevant", "editor": "alice"})
        assert resp.status_code == 200
        assert resp.json()["decision"]["actor"] == "human"
        advance(client, run_id, times=4)
        state = client.get(f"/api/runs/{run_id}").json()
        assert state["funnel"]["title_included"] == 4


class TestFeedback:
    def test_ratings_catalogue(self, client):
        body = client.get("/api/feedback/ratings").json()
        assert body["ratings"] == list(FEEDBACK_RATINGS)
        assert len(body["ratings"]) == 6

    def test_post_feedback(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        resp = client.post(f"/api/runs/{run_id}/feedback",
                           json={"rating": "Excellent", "comment": "great"})
        assert resp.status_code == 201
        assert resp.json()["feedback"]["rating"] == "Excellent"

    def test_bad_rating_422(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        resp = client.post(f"/api/runs/{run_id}/feedback", json={"rating": "Meh"})
        assert resp.status_code == 422


class TestEvents:
    def test_long_poll_cursor(self, client, protocol_doc):
        run_id = create_run(client, protocol_doc)
        first = client.get(f"/api/events/{run_id}",
                           params={"cursor": 0, "timeout": 0}).json()
        assert [e["kind"] for e in first["events"]] == ["run_created"]
        cursor = first["cursor"]
        advance(client, run_id)
        second = client.get(f"/api/events/{run_id}",
                            params={"cursor": cursor, "timeout": 0}).json()
        kinds = [e["kind"] for e in second["events"]]
        assert kinds == ["stage_started", "stage_completed"]
        assert second["cursor"] > cursor
        # no new events: empty list, cursor unchanged
        third = client.get(f"/api/events/{run_id}",
                           params={"cursor": second["cursor"], "timeout": 0}).json()
        assert third["events"] == []
        assert third["cursor"] == second["cursor"]
