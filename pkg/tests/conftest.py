import math
from pathlib import Path

import pytest

from pathrun import agents, propagator
from pathrun.simworld import read_level

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# every Born normalization performed during the session, as (sum, size)
BORN_SUMS = []
ACCEPTANCE = {}

_born = propagator.born_distribution


def _recording_born(field_or_map):
    out = _born(field_or_map)
    BORN_SUMS.append(math.fsum(out.values()))
    return out


propagator.born_distribution = _recording_born


def pytest_collection_modifyitems(session, config, items):
    # acceptance runs last so the normalization criterion sees the whole suite
    items.sort(key=lambda it: it.fspath.basename == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'} {detail}")


@pytest.fixture(scope="session")
def l1():
    return read_level(FIXTURES / "l1.txt")


@pytest.fixture(scope="session")
def two_route():
    return read_level(FIXTURES / "two_route.txt")


_BATCHES = {}


@pytest.fixture(scope="session")
def batch(l1):
    """Cached pinned-seed batches on the 8x6 fixture."""

    def get(kind, p, n=10_000, seed=11, category=None, threads=1):
        key = (kind, p, n, seed, category, threads)
        if key not in _BATCHES:
            spec = agents.AgentSpec(kind, p, category=category or agents.ANY_PERCENT)
            _BATCHES[key] = agents.generate_runs(spec, l1, n, seed, threads=threads)
        return _BATCHES[key]

    return get
