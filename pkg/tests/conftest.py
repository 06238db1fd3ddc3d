import pytest

_RESULTS = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            item.user_properties.append(("criterion", (m.args[0], m.args[1])))


@pytest.hookimpl(trylast=True)
def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _RESULTS.get(crit)
        # a criterion split over several tests passes only if all of them pass
        ok = report.outcome == "passed" and (prev is None or prev)
        _RESULTS[crit] = ok


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for (num, desc), ok in sorted(_RESULTS.items()):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {desc}")
