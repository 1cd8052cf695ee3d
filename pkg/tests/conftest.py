import time
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    number, title = marker.args
    results = item.config.stash[_RESULTS]
    prev = results.get(number, (title, True, []))
    ok = prev[1] and rep.passed and not rep.skipped
    detail = prev[2] + ([] if rep.passed else [item.name])
    results[number] = (title, ok, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, failed = results[number]
        suffix = f" (failed: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {title}{suffix}")


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture
def timer():
    start = time.perf_counter()
    return lambda: time.perf_counter() - start
