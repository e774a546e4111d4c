import functools
import time

import pytest
from hypothesis import settings

from bhdsim.harness import get_scenario, run_scenario

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

CI_SCALE = 0.01

SESSION = {"start": time.monotonic(), "failed": [], "passed": 0, "acceptance": []}


@functools.lru_cache(maxsize=None)
def _cached(name, overrides):
    return run_scenario(get_scenario(name, frequency_scale=CI_SCALE, **dict(overrides)))


@pytest.fixture(scope="session")
def scenario():
    """Run a built-in scenario at CI scale, memoized across the session."""

    def run(name, **overrides):
        return _cached(name, tuple(sorted(overrides.items())))

    return run


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def record(tag, title, passed, detail):
        line = f"{tag} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        print(line)
        SESSION["acceptance"].append(line)
        return passed

    return record


def pytest_collection_modifyitems(items):
    # acceptance last, so the property-suite criterion can see the other results
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")


def pytest_runtest_logreport(report):
    # tally everything except the acceptance criteria themselves
    if "test_acceptance.py" in report.nodeid:
        return
    if report.failed:
        SESSION["failed"].append(report.nodeid)
    elif report.when == "call" and report.passed:
        SESSION["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if SESSION["acceptance"]:
        terminalreporter.section("acceptance criteria")
        for line in SESSION["acceptance"]:
            terminalreporter.write_line(line)
