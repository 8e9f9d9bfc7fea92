"""Run store: one directory per run holding the protocol, candidate records,
decisions, extractions, report artifacts, an append-only event log and
per-stage checkpoint markers. Writes are atomic (temp file + rename); the
markers are the commit points for crash recovery."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from .errors import CorruptStore

ARTIFACTS = (
    "protocol.json",
    "candidates.jsonl",
    "decisions.jsonl",
    "extractions.jsonl",
    "funnel.json",
    "syntheses.json",
    "report.md",
    "report.csv",
    "events.log",
    "feedback.jsonl",
)


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


class RunStore:
    def __init__(self, run_dir):
        self.run_dir = Path(run_dir)

    @property
    def run_id(self) -> str:
        return self.run_dir.name

    def initialize(self):
        self.run_dir.mkdir(parents=True)
        (self.run_dir / "checkpoints").mkdir()
        (self.run_dir / "events.log").touch()
        (self.run_dir / ".lock").touch()

    def exists(self) -> bool:
        return (self.run_dir / "protocol.json").exists()

    def path(self, name: str) -> Path:
        return self.run_dir / name

    # -- atomic file primitives ------------------------------------------

    def write_text_atomic(self, name: str, text: str):
        path = self.path(name)
        fd, tmp = tempfile.mkstemp(dir=self.run_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def write_json_atomic(self, name: str, obj):
        self.write_text_atomic(name, json.dumps(obj, indent=2, ensure_ascii=False) + "\n")

    def read_json(self, name: str):
        path = self.path(name)
        try:
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            raise
        except (OSError, json.JSONDecodeError) as exc:
            raise CorruptStore(path, f"unreadable {name}: {exc}") from exc

    # -- JSONL ------------------------------------------------------------

    def read_jsonl(self, name: str) -> tuple[list, bool]:
        """Parse a JSONL file. A malformed *last* line (torn write) is
        discarded and reported via the second return value; a malformed line
        anywhere else is store corruption."""
        path = self.path(name)
        if not path.exists():
            return [], False
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        records = []
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                if i == len(lines) - 1:
                    return records, True
                raise CorruptStore(path, f"malformed line {i + 1} in {name}") from exc
        return records, False

    def append_jsonl(self, name: str, obj):
        with open(self.path(name), "a", encoding="utf-8") as fh:
            fh.write(_canonical(obj) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def rewrite_jsonl(self, name: str, objs):
        self.write_text_atomic(name, "".join(_canonical(o) + "\n" for o in objs))

    # -- events -----------------------------------------------------------

    def append_event(self, kind: str, payload: dict, clock):
        events, _ = self.read_jsonl("events.log")
        seq = events[-1]["seq"] + 1 if events else 1
        event = {"seq": seq, "ts": clock.timestamp(), "kind": kind, "payload": payload}
        self.append_jsonl("events.log", event)
        return event

    def read_events(self, since: int = 0) -> list:
        events, _ = self.read_jsonl("events.log")
        return [e for e in events if e["seq"] > since]

    # -- checkpoint markers -----------------------------------------------

    def marker_path(self, stage: str) -> Path:
        return self.run_dir / "checkpoints" / f"{stage}.marker"

    def write_marker(self, stage: str, outputs: dict, clock):
        path = self.marker_path(stage)
        payload = {"stage": stage, "outputs": outputs, "completed_at": clock.timestamp()}
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(payload, fh)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def read_marker(self, stage: str):
        path = self.marker_path(stage)
        if not path.exists():
            return None
        try:
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError):
            return None  # torn marker write: stage counts as incomplete

    def delete_marker(self, stage: str):
        path = self.marker_path(stage)
        if path.exists():
            path.unlink()


def digest_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def digest_objs(objs) -> str:
    return digest_text("\n".join(_canonical(o) for o in objs))


def digest_file(path: Path) -> str | None:
    if not path.exists():
        return None
    return hashlib.sha256(path.read_bytes()).hexdigest()
