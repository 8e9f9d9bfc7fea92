import json
from pathlib import Path

import pytest

from slrpipe.clock import LogicalClock
from slrpipe.config import Config
from slrpipe.domain import ReviewProtocol
from slrpipe.gateway import Gateway, MockProvider
from slrpipe.orchestrator import Orchestrator

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def demo_protocol():
    with open(FIXTURES / "demo_protocol.json", encoding="utf-8") as fh:
        return ReviewProtocol.from_dict(json.load(fh))


@pytest.fixture
def demo_scenario_path():
    return FIXTURES / "scenarios" / "paper_demo.json"


def make_orchestrator(tmp_path, scenario="paper_demo.json", subdir="a",
                      pause_policy="auto", fixture_root=None):
    """Orchestrator wired to the mock provider with isolated store/cache."""
    base = tmp_path / subdir
    cfg = Config(
        runs_dir=base / "runs",
        cache_dir=base / "cache",
        fixture_root=fixture_root or (FIXTURES / "providers"),
        pause_policy=pause_policy,
    )
    if isinstance(scenario, (str, Path)):
        provider = MockProvider.from_file(FIXTURES / "scenarios" / scenario)
    else:
        provider = MockProvider(scenario)
    gateway = Gateway(provider, cache_dir=cfg.cache_dir)
    return Orchestrator(cfg, gateway, LogicalClock())


@pytest.fixture
def orchestrator(tmp_path):
    return make_orchestrator(tmp_path)
