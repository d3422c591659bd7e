import json

import pytest


@pytest.fixture
def write_lines(tmp_path):
    """Write a list of JSON-able objects (or raw strings) as a JSONL file."""

    def _write(name, rows):
        p = tmp_path / name
        lines = [r if isinstance(r, str) else json.dumps(r) for r in rows]
        p.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return p

    return _write


_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _ACCEPTANCE.append((mark.args[0], mark.args[1], rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, text, outcome in sorted(_ACCEPTANCE):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {cid}: {text}")
