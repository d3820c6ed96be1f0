"""One summary line per acceptance criterion, printed after the run."""

import pytest

_results: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and rep.passed:
        return
    n, title = mark.args
    entry = _results.setdefault(n, [title, True, ""])
    if rep.failed:
        entry[1] = False
        entry[2] = str(rep.longrepr.reprcrash.message) if hasattr(rep.longrepr, "reprcrash") else ""


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        title, ok, why = _results[n]
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}"
        if not ok and why:
            line += f"  ({why.splitlines()[0][:120]})"
        terminalreporter.write_line(line)
