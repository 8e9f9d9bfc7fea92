"""Operator command line covering every stage of the pipeline.

Exit codes: 0 ok, 1 validation/usage, 2 stage failure, 3 store corruption.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .clock import LogicalClock, SystemTimeClock
from .config import load_config
from .domain import ReviewProtocol
from .errors import (
    CorruptStore,
    GatewayError,
    QuerySyntaxError,
    SlrError,
    StageFailed,
)
from .gateway import Gateway, LiveProvider, MockProvider
from .orchestrator import Orchestrator
from . import planner


class CliContext:
    def __init__(self, config_path, provider, scenario, json_output):
        self.config = load_config(config_path)
        self.provider_kind = provider
        self.scenario = scenario
        self.json_output = json_output
        self._orchestrator = None

    def gateway(self) -> Gateway:
        if self.provider_kind == "mock":
            if not self.scenario:
                raise click.UsageError("--provider mock requires --scenario PATH")
            provider = MockProvider.from_file(self.scenario)
        else:
            provider = LiveProvider(
                self.config.llm_base_url, api_key=self.config.llm_api_key
            )
        return Gateway(
            provider, cache_dir=self.config.cache_dir, model_id=self.config.llm_model
        )

    def orchestrator(self) -> Orchestrator:
        if self._orchestrator is None:
            clock = LogicalClock() if self.provider_kind == "mock" else SystemTimeClock()
            self._orchestrator = Orchestrator(self.config, self.gateway(), clock)
        return self._orchestrator

    def emit(self, data: dict, human: str | None = None):
        if self.json_output:
            click.echo(json.dumps(data, indent=2))
        else:
            click.echo(human if human is not None else json.dumps(data, indent=2))


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Config file (INI format).")
@click.option("--provider", type=click.Choice(["live", "mock"]), default="live")
@click.option("--scenario", type=click.Path(exists=True), default=None,
              help="Mock scenario file (required with --provider mock).")
@click.option("--json", "json_output", is_flag=True, help="Machine-readable output.")
@click.pass_context
def cli(ctx, config_path, provider, scenario, json_output):
    """Automated systematic literature review pipeline."""
    ctx.obj = CliContext(config_path, provider, scenario, json_output)


@cli.command()
@click.argument("topic")
@click.option("--objective", default="")
@click.option("--questions", "n_questions", type=int, default=2)
@click.option("--mode", type=click.Choice(["paper_faithful", "extended"]),
              default="paper_faithful")
@click.option("--out", type=click.Path(), default=None, help="Write protocol JSON here.")
@click.pass_obj
def plan(app: CliContext, topic, objective, n_questions, mode, out):
    """Generate research questions and a search query for TOPIC."""
    protocol = planner.build_protocol(
        app.gateway(), topic, objective, n_questions, mode,
        max_records=app.config.max_records_default,
    )
    doc = protocol.to_dict()
    if out:
        Path(out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        app.emit({"protocol_path": out}, f"protocol written to {out}")
    else:
        click.echo(json.dumps(doc, indent=2))


@cli.command()
@click.argument("protocol_file", type=click.Path(exists=True))
@click.option("--pause", is_flag=True, help="Pause after each stage.")
@click.pass_obj
def run(app: CliContext, protocol_file, pause):
    """Create a run from PROTOCOL_FILE and advance it."""
    if pause:
        app.config.pause_policy = "pause_after_each_stage"
    with open(protocol_file, encoding="utf-8") as fh:
        protocol = ReviewProtocol.from_dict(json.load(fh))
    orch = app.orchestrator()
    run_id = orch.create_run(protocol)
    result = orch.run_all(run_id)
    state = orch.state(run_id)
    app.emit(
        {"run_id": run_id, "stage": state["stage"], "funnel": state["funnel"],
         "paused": result["paused_awaiting_human"]},
        f"run {run_id}: {state['stage']}"
        + (f"\nfunnel: {state['funnel']}" if state["funnel"] else ""),
    )


@cli.command()
@click.argument("run_id")
@click.pass_obj
def advance(app: CliContext, run_id):
    """Execute the next stage of RUN_ID."""
    result = app.orchestrator().advance(run_id)
    app.emit(result, f"{run_id}: completed {result['stage']}")


@cli.command()
@click.argument("run_id")
@click.argument("decision_id")
@click.argument("verdict", type=click.Choice(["include", "exclude"]))
@click.option("--why", "rationale", required=True)
@click.option("--editor", default="cli")
@click.pass_obj
def override(app: CliContext, run_id, decision_id, verdict, rationale, editor):
    """Record a human screening verdict superseding DECISION_ID."""
    decision = app.orchestrator().apply_override(
        run_id, decision_id, verdict, rationale, editor
    )
    app.emit({"decision": decision}, f"recorded human {verdict} for {decision_id}")


@cli.command()
@click.argument("run_id")
@click.option("--query", default=None, help="Replace the search query (text form).")
@click.option("--year", default=None, help="Year range as START:END.")
@click.option("--editor", default="cli")
@click.pass_obj
def edit(app: CliContext, run_id, query, year, editor):
    """Edit the run's protocol (downstream checkpoints are invalidated)."""
    if (query is None) == (year is None):
        raise click.UsageError("provide exactly one of --query or --year")
    orch = app.orchestrator()
    if query is not None:
        updated = orch.edit_protocol(run_id, "query", query, editor)
    else:
        start_s, _, end_s = year.partition(":")
        value = {"start": int(start_s) if start_s else None,
                 "end": int(end_s) if end_s else None}
        updated = orch.edit_protocol(run_id, "year_range", value, editor)
    app.emit({"protocol": updated}, f"protocol of {run_id} updated")


@cli.command()
@click.argument("run_id")
@click.pass_obj
def report(app: CliContext, run_id):
    """Print the run's report (with --json: funnel and artifact paths)."""
    orch = app.orchestrator()
    store = orch.store(run_id)
    path = store.path("report.md")
    if not path.exists():
        raise SlrError(f"run {run_id} has no report yet; advance it first")
    if app.json_output:
        app.emit(
            {
                "funnel": store.read_json("funnel.json"),
                "report_md": str(path),
                "report_csv": str(store.path("report.csv")),
            }
        )
    else:
        click.echo(path.read_text(encoding="utf-8"), nl=False)


@cli.command()
@click.argument("run_id")
@click.pass_obj
def resume(app: CliContext, run_id):
    """Reload RUN_ID from its checkpoints and report its state."""
    state = app.orchestrator().resume(run_id)
    app.emit(state, f"run {run_id} at stage {state['stage']}")


@cli.command()
@click.argument("run_id")
@click.option("--rating", required=True)
@click.option("--comment", default="")
@click.option("--role", default="")
@click.pass_obj
def feedback(app: CliContext, run_id, rating, comment, role):
    """Record satisfaction feedback for RUN_ID."""
    entry = app.orchestrator().record_feedback(run_id, rating, comment, role)
    app.emit({"feedback": entry}, f"feedback recorded: {rating}")


@cli.command()
@click.option("--addr", default="127.0.0.1:8000", help="HOST:PORT to bind.")
@click.pass_obj
def serve(app: CliContext, addr):
    """Serve the HTTP control API (and the console UI when built)."""
    import uvicorn

    from .api import create_app

    host, _, port = addr.partition(":")
    ui_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    api = create_app(app.orchestrator(), ui_dir=ui_dir if ui_dir.is_dir() else None)
    uvicorn.run(api, host=host or "127.0.0.1", port=int(port or 8000))


def main(argv=None):
    try:
        return cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_help(), err=True)
        else:
            with click.Context(cli) as ctx:
                click.echo(cli.get_help(ctx), err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except CorruptStore as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    except StageFailed as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3 if isinstance(exc.cause, CorruptStore) else 2)
    except QuerySyntaxError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except (SlrError, GatewayError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
