"""Record real HTTP API payloads for the review console's stub-backed tests.

Drives the offline demo through the FastAPI app and snapshots the responses
the console consumes into frontend/tests/recorded/.
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from slrpipe.api import create_app  # noqa: E402
from slrpipe.clock import LogicalClock  # noqa: E402
from slrpipe.config import Config  # noqa: E402
from slrpipe.gateway import Gateway, MockProvider  # noqa: E402
from slrpipe.orchestrator import Orchestrator  # noqa: E402

OUT = REPO / "frontend" / "tests" / "recorded"
FIXTURES = REPO / "fixtures"


def make_client(base: Path) -> TestClient:
    cfg = Config(
        runs_dir=base / "runs",
        cache_dir=base / "cache",
        fixture_root=FIXTURES / "providers",
        pause_policy="pause_after_each_stage",
    )
    provider = MockProvider.from_file(FIXTURES / "scenarios" / "paper_demo.json")
    orch = Orchestrator(cfg, Gateway(provider, cache_dir=cfg.cache_dir), LogicalClock())
    return TestClient(create_app(orch))


def dump(name: str, payload):
    path = OUT / name
    if name.endswith(".json"):
        path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
                        encoding="utf-8")
    else:
        path.write_text(payload, encoding="utf-8")
    print(f"wrote {path.relative_to(REPO)}")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    protocol = json.loads((FIXTURES / "demo_protocol.json").read_text())

    with tempfile.TemporaryDirectory() as tmp:
        client = make_client(Path(tmp))
        run_id = client.post("/api/runs", json=protocol).json()["run_id"]
        for _ in range(4):  # plan, retrieve, screen_title, screen_abstract
            client.post(f"/api/runs/{run_id}/advance").raise_for_status()

        dump("state_screening.json", client.get(f"/api/runs/{run_id}").json())
        dump("decisions.json", client.get(f"/api/runs/{run_id}/decisions").json())
        dump("candidates.json", client.get(f"/api/runs/{run_id}/candidates").json())

        bad = client.patch(f"/api/runs/{run_id}/protocol",
                           json={"field": "query", "value": "(llm OR"})
        assert bad.status_code == 422
        dump("invalid_query_edit.json",
             {"status": 422, "body": bad.json()})

        # override captured on a throwaway run so the main recording keeps
        # the canonical demo funnel
        alt = make_client(Path(tmp) / "alt")
        alt_run = alt.post("/api/runs", json=protocol).json()["run_id"]
        for _ in range(3):
            alt.post(f"/api/runs/{alt_run}/advance").raise_for_status()
        alt_decisions = alt.get(f"/api/runs/{alt_run}/decisions").json()["decisions"]
        included = next(d for d in alt_decisions if d["verdict"] == "include")
        over = alt.post(
            f"/api/runs/{alt_run}/decisions/title:{included['record_id']}/override",
            json={"verdict": "exclude", "rationale": "out of scope on review",
                  "editor": "reviewer"})
        assert over.status_code == 200
        dump("override_response.json", over.json())

        for _ in range(3):  # extract, synthesize, report
            client.post(f"/api/runs/{run_id}/advance").raise_for_status()
        dump("state_final.json", client.get(f"/api/runs/{run_id}").json())
        dump("report.md", client.get(f"/api/runs/{run_id}/report").text)
        dump("ratings.json", client.get("/api/feedback/ratings").json())
        dump("events.json",
             client.get(f"/api/events/{run_id}", params={"timeout": 0}).json())
        fb = client.post(f"/api/runs/{run_id}/feedback",
                         json={"rating": "Very Good", "comment": "clear report",
                               "role": "researcher"})
        assert fb.status_code == 201
        dump("feedback_response.json", fb.json())
        dump("run_id.json", {"run_id": run_id})


if __name__ == "__main__":
    main()
