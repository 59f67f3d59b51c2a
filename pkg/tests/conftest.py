import pytest

_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    prev = _results.get(number, (title, "PASS"))[1]
    if rep.failed:
        _results[number] = (title, "FAIL")
    elif rep.when == "call":
        _results[number] = (title, "SKIP" if rep.skipped else prev)
    elif rep.skipped:
        _results[number] = (title, "SKIP")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, status = _results[number]
        terminalreporter.write_line(f"criterion {number:2d}  {status}  {title}")
