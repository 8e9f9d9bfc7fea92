"""Run orchestrator: drives the stage state machine plan -> retrieve ->
screen_title -> screen_abstract -> extract -> synthesize -> report with
checkpoint markers as commit points, crash-safe resume, audited human
interventions, and the feedback log."""

from __future__ import annotations

import logging
import uuid
from dataclasses import replace

from filelock import FileLock

from . import extraction, planner, retrieval, screening, synthesis
from .domain import (
    FeedbackEntry,
    FunnelCounts,
    PaperRecord,
    ReviewProtocol,
    ScreeningDecision,
    effective_decisions,
)
from .errors import (
    NoContent,
    RunFinalized,
    StageFailed,
    StageIncomplete,
    UnknownRun,
)
from .extraction import ExtractionRecord
from .querylang import print_query
from .store import RunStore, digest_file, digest_objs
from .screening import included_ids

log = logging.getLogger(__name__)

STAGES = (
    "plan",
    "retrieve",
    "screen_title",
    "screen_abstract",
    "extract",
    "synthesize",
    "report",
)

# First stage whose checkpoint a protocol-field edit invalidates.
FIELD_FIRST_STAGE = {
    "query": "retrieve",
    "year_range": "retrieve",
    "max_records": "retrieve",
    "criteria": "screen_title",
    "questions": "extract",
}

_SCREEN_DOMAIN_STAGE = {"screen_title": "title", "screen_abstract": "abstract"}


class Orchestrator:
    def __init__(self, config, gateway, clock, transports=None):
        self.config = config
        self.gateway = gateway
        self.clock = clock
        self.runs_dir = config.runs_dir
        self._transports = transports or {}

    # ------------------------------------------------------------------
    # Store access

    def store(self, run_id: str) -> RunStore:
        store = RunStore(self.runs_dir / run_id)
        if not store.exists():
            raise UnknownRun(f"no run {run_id!r}")
        return store

    def list_runs(self) -> list[str]:
        if not self.runs_dir.exists():
            return []
        return sorted(
            p.name for p in self.runs_dir.iterdir()
            if (p / "protocol.json").exists()
        )

    def _lock(self, store: RunStore):
        return FileLock(str(store.path(".lock")) + ".flock", timeout=30)

    def _protocol(self, store: RunStore) -> ReviewProtocol:
        try:
            return ReviewProtocol.from_dict(store.read_json("protocol.json"))
        except FileNotFoundError:
            raise UnknownRun(f"no run {store.run_id!r}") from None

    def _candidates(self, store) -> list[PaperRecord]:
        rows, _ = store.read_jsonl("candidates.jsonl")
        return [PaperRecord.from_dict(r) for r in rows]

    def _decisions(self, store) -> list[ScreeningDecision]:
        rows, _ = store.read_jsonl("decisions.jsonl")
        return [ScreeningDecision.from_dict(r) for r in rows]

    def _extractions(self, store) -> list[ExtractionRecord]:
        rows, _ = store.read_jsonl("extractions.jsonl")
        return [ExtractionRecord.from_dict(r) for r in rows]

    # ------------------------------------------------------------------
    # Lifecycle

    def create_run(self, protocol: ReviewProtocol) -> str:
        run_id = "run-" + uuid.uuid4().hex[:12]
        store = RunStore(self.runs_dir / run_id)
        store.initialize()
        store.write_json_atomic("protocol.json", protocol.to_dict())
        store.append_event("run_created", {"topic": protocol.topic}, self.clock)
        return run_id

    def state(self, run_id: str) -> dict:
        store = self.store(run_id)
        protocol = self._protocol(store)
        completed = [s for s in STAGES if self._marker_valid(store, s)]
        if len(completed) == len(STAGES):
            status, stage = "finalized", "finalized"
        elif not completed:
            status, stage = "created", "created"
        else:
            status, stage = "in_progress", completed[-1]
        view = {
            "run_id": run_id,
            "stage": stage,
            "status": status,
            "stages_completed": completed,
            "protocol": protocol.to_dict(),
            "funnel": None,
        }
        if self._marker_valid(store, "synthesize"):
            view["funnel"] = store.read_json("funnel.json")
        return view

    def resume(self, run_id: str) -> dict:
        """Reconstruct run state from checkpoints and the event log, clearing
        any checkpoint whose outputs no longer match (torn writes)."""
        store = self.store(run_id)
        with self._lock(store):
            self._next_stage(store)  # validates markers, records recovery events
        return self.state(run_id)

    # ------------------------------------------------------------------
    # Checkpoints

    def _stage_digests(self, store: RunStore, stage: str) -> dict:
        if stage == "plan":
            return {"protocol.json": digest_file(store.path("protocol.json"))}
        if stage == "retrieve":
            rows, _ = store.read_jsonl("candidates.jsonl")
            return {"candidates.jsonl": digest_objs(rows)}
        if stage in _SCREEN_DOMAIN_STAGE:
            domain_stage = _SCREEN_DOMAIN_STAGE[stage]
            rows, _ = store.read_jsonl("decisions.jsonl")
            # Human overrides are excluded: appending one must not invalidate
            # the stage that produced the machine decisions.
            own = [
                r for r in rows
                if r.get("stage") == domain_stage and r.get("actor") != "human"
            ]
            return {f"decisions:{domain_stage}": digest_objs(own)}
        if stage == "extract":
            rows, _ = store.read_jsonl("extractions.jsonl")
            return {"extractions.jsonl": digest_objs(rows)}
        if stage == "synthesize":
            return {
                "funnel.json": digest_file(store.path("funnel.json")),
                "syntheses.json": digest_file(store.path("syntheses.json")),
            }
        return {
            "report.md": digest_file(store.path("report.md")),
            "report.csv": digest_file(store.path("report.csv")),
        }

    def _marker_valid(self, store, stage) -> bool:
        marker = store.read_marker(stage)
        return marker is not None and marker["outputs"] == self._stage_digests(store, stage)

    def _next_stage(self, store: RunStore) -> str | None:
        """First incomplete stage, or None when finalized. A marker whose
        recorded output hashes no longer match is cleared (with every
        downstream marker) and its stage re-run from persisted inputs."""
        for i, stage in enumerate(STAGES):
            marker = store.read_marker(stage)
            if marker is None:
                return stage
            if marker["outputs"] != self._stage_digests(store, stage):
                for later in STAGES[i:]:
                    store.delete_marker(later)
                store.append_event(
                    "checkpoint_recovered",
                    {"stage": stage, "reason": "output hash mismatch"},
                    self.clock,
                )
                return stage
        return None

    # ------------------------------------------------------------------
    # Advancing

    def advance(self, run_id: str) -> dict:
        store = self.store(run_id)
        with self._lock(store):
            stage = self._next_stage(store)
            if stage is None:
                raise RunFinalized(f"run {run_id} is finalized")
            store.append_event("stage_started", {"stage": stage}, self.clock)
            try:
                summary = getattr(self, f"_stage_{stage}")(store)
            except Exception as exc:
                store.append_event(
                    "run_failed", {"stage": stage, "error": str(exc)}, self.clock
                )
                raise StageFailed(stage, exc) from exc
            # Output-then-marker order: the marker is the commit point.
            store.write_marker(stage, self._stage_digests(store, stage), self.clock)
            store.append_event(
                "stage_completed", {"stage": stage, "summary": summary}, self.clock
            )
            finalized = stage == STAGES[-1]
            return {
                "run_id": run_id,
                "stage": stage,
                "summary": summary,
                "finalized": finalized,
                "paused_awaiting_human": (
                    not finalized
                    and self.config.pause_policy == "pause_after_each_stage"
                ),
            }

    def run_all(self, run_id: str) -> dict:
        """Advance until finalized, or until the pause policy yields."""
        while True:
            result = self.advance(run_id)
            if result["finalized"] or result["paused_awaiting_human"]:
                return result

    # ------------------------------------------------------------------
    # Stage implementations

    def _stage_plan(self, store) -> dict:
        protocol = self._protocol(store)
        if not protocol.questions:
            questions = planner.generate_questions(
                self.gateway, protocol.topic, protocol.objective
            )
            protocol = planner.apply_plan_edit(
                protocol, {"field": "questions", "value": questions, "editor": ""}
            )
        if protocol.query is None:
            query = planner.generate_search_query(
                self.gateway, protocol.topic, protocol.questions,
                protocol.replication_mode,
            )
            protocol = replace(protocol, query=query)
        store.write_json_atomic("protocol.json", protocol.to_dict())
        return {
            "questions": [q.id for q in protocol.questions],
            "query": print_query(protocol.query),
        }

    def _transport_for(self, provider) -> object:
        kind = self.config.transport_for(provider.tag)
        if kind not in self._transports:
            if kind == "fixture":
                self._transports[kind] = retrieval.FixtureTransport(self.config.fixture_root)
            else:
                self._transports[kind] = retrieval.HttpTransport(self.config.contact)
        return self._transports[kind]

    def _stage_retrieve(self, store) -> dict:
        protocol = self._protocol(store)
        providers = self.config.enabled_providers()
        orchestrator = self

        class Routing:
            def get(self, provider, request, page_index):
                return orchestrator._transport_for(provider).get(
                    provider, request, page_index
                )

        raw = retrieval.fetch_candidates(
            protocol,
            providers,
            Routing(),
            event_sink=lambda kind, payload: store.append_event(
                kind, payload, self.clock
            ),
        )
        unique, merge_log = retrieval.deduplicate(raw)
        store.rewrite_jsonl("candidates.jsonl", [r.to_dict() for r in unique])
        return {
            "identified": len(raw),
            "deduplicated": len(unique),
            "merges": merge_log,
        }

    def _screen(self, store, domain_stage: str) -> dict:
        protocol = self._protocol(store)
        candidates = self._candidates(store)
        if domain_stage == "title":
            records = candidates
        else:
            prior = self._decisions(store)
            keep = set(included_ids(prior, "title"))
            records = [r for r in candidates if r.record_id in keep]
        existing, _ = store.read_jsonl("decisions.jsonl")
        kept = [
            r for r in existing
            if r.get("stage") != domain_stage or r.get("actor") == "human"
        ]
        store.rewrite_jsonl("decisions.jsonl", kept)
        decisions = screening.screen_stage(
            records,
            protocol,
            domain_stage,
            self.gateway,
            self.clock,
            persist=lambda d: store.append_jsonl("decisions.jsonl", d.to_dict()),
        )
        included = included_ids(self._decisions(store), domain_stage)
        return {
            "screened": len(decisions),
            "included": len(included),
            "needs_judge": len([d for d in decisions if d.verdict == "needs_judge"]),
        }

    def _stage_screen_title(self, store) -> dict:
        return self._screen(store, "title")

    def _stage_screen_abstract(self, store) -> dict:
        return self._screen(store, "abstract")

    def _stage_extract(self, store) -> dict:
        protocol = self._protocol(store)
        protocol.require_questions()
        candidates = self._candidates(store)
        decisions = self._decisions(store)
        keep = set(included_ids(decisions, "abstract"))
        included = [r for r in candidates if r.record_id in keep]
        store.rewrite_jsonl("extractions.jsonl", [])
        done = 0
        for record in included:
            try:
                ext = extraction.extract_answers(self.gateway, record, protocol)
            except NoContent:
                store.append_event(
                    "extraction_skipped",
                    {"record_id": record.record_id, "reason": "no content"},
                    self.clock,
                )
                continue
            store.append_jsonl("extractions.jsonl", ext.to_dict())
            done += 1
        return {"extracted": done, "of": len(included)}

    def _stage_synthesize(self, store) -> dict:
        protocol = self._protocol(store)
        candidates = self._candidates(store)
        decisions = self._decisions(store)
        extractions = self._extractions(store)
        funnel = synthesis.compute_funnel(candidates, decisions, extractions)
        syntheses = synthesis.synthesize_all(self.gateway, protocol, extractions)
        synthesis.check_citation_closure(
            syntheses, {e.record_id for e in extractions}
        )
        store.write_json_atomic("funnel.json", funnel.to_dict())
        store.write_json_atomic("syntheses.json", syntheses)
        return {"funnel": funnel.to_dict()}

    def _stage_report(self, store) -> dict:
        protocol = self._protocol(store)
        funnel = FunnelCounts.from_dict(store.read_json("funnel.json"))
        syntheses = store.read_json("syntheses.json")
        candidates = self._candidates(store)
        decisions = self._decisions(store)
        extractions = self._extractions(store)
        report_md = synthesis.render_report_md(
            protocol, funnel, candidates, decisions, extractions, syntheses,
            store.read_events(),
        )
        table = extraction.tabulate(
            extractions, {r.record_id: r for r in candidates}, protocol
        )
        store.write_text_atomic("report.md", report_md)
        store.write_text_atomic("report.csv", extraction.table_to_csv(table))
        return {"report": "report.md", "rows": len(table["rows"])}

    # ------------------------------------------------------------------
    # Human interventions and feedback

    def _check_not_finalized(self, store):
        if all(store.read_marker(s) is not None for s in STAGES):
            raise RunFinalized(f"run {store.run_id} is finalized")

    def apply_override(self, run_id, decision_id, verdict, rationale, editor="") -> dict:
        store = self.store(run_id)
        with self._lock(store):
            self._check_not_finalized(store)
            decisions = self._decisions(store)
            decision = screening.apply_override(
                decisions, decision_id, verdict, rationale, editor, self.clock
            )
            store.append_jsonl("decisions.jsonl", decision.to_dict())
            store.append_event(
                "decision_overridden",
                {
                    "decision_id": decision_id,
                    "verdict": verdict,
                    "rationale": rationale,
                    "editor": editor,
                },
                self.clock,
            )
            # Downstream stages recompute their input sets on next advance.
            stage_name = "screen_title" if decision.stage == "title" else "screen_abstract"
            for later in STAGES[STAGES.index(stage_name) + 1 :]:
                store.delete_marker(later)
            return decision.to_dict()

    def edit_protocol(self, run_id, field: str, value, editor="") -> dict:
        store = self.store(run_id)
        with self._lock(store):
            self._check_not_finalized(store)
            protocol = self._protocol(store)
            updated = planner.apply_plan_edit(
                protocol,
                {"field": field, "value": value, "editor": editor},
                event_sink=lambda kind, payload: store.append_event(
                    kind, payload, self.clock
                ),
            )
            store.write_json_atomic("protocol.json", updated.to_dict())
            # The edited protocol is the new plan; re-commit the plan stage and
            # invalidate everything the edit feeds.
            if store.read_marker("plan") is not None:
                store.write_marker(
                    "plan", self._stage_digests(store, "plan"), self.clock
                )
            first = FIELD_FIRST_STAGE[field]
            for later in STAGES[STAGES.index(first) :]:
                store.delete_marker(later)
            return updated.to_dict()

    def record_feedback(self, run_id, rating, comment="", role="") -> dict:
        store = self.store(run_id)
        entry = FeedbackEntry(run_id=run_id, rating=rating, comment=comment, role=role)
        store.append_jsonl("feedback.jsonl", entry.to_dict())
        store.append_event("feedback_recorded", {"rating": rating}, self.clock)
        return entry.to_dict()

    def compute_funnel(self, run_id) -> FunnelCounts:
        store = self.store(run_id)
        for stage in ("screen_title", "screen_abstract"):
            if not self._marker_valid(store, stage):
                raise StageIncomplete(f"{stage} has not completed")
        return synthesis.compute_funnel(
            self._candidates(store), self._decisions(store), self._extractions(store)
        )
