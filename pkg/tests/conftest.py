"""Per-criterion PASS/FAIL lines for the acceptance suite.

Acceptance tests carry ``@pytest.mark.criterion(n, part)`` and report their
verdict through the ``check`` fixture; the terminal summary folds the parts
into one line per criterion.
"""
import pytest

_VERDICTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, part=''): acceptance criterion checked by the test")


@pytest.fixture
def check(record_property):
    """check(ok, detail): record the verdict, then assert it."""

    def _check(ok, detail):
        record_property("verdict", bool(ok))
        record_property("detail", detail)
        assert ok, detail

    return _check


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    props = dict(rep.user_properties)
    # an exception before check() ran counts as a failure
    ok = props.get("verdict", False) if rep.when == "call" else False
    num = mark.args[0]
    part = mark.args[1] if len(mark.args) > 1 else mark.kwargs.get("part", "")
    lines = rep.longreprtext.splitlines()
    _VERDICTS[(num, part)] = (ok, props.get("detail", lines[-1] if lines else ""))


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted({n for n, _ in _VERDICTS}):
        parts = sorted((p, v) for (n, p), v in _VERDICTS.items() if n == num)
        ok = all(v[0] for _, v in parts)
        tr.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}")
        for p, (pok, detail) in parts:
            label = f"{num}{p}" if p else f"{num}"
            tr.write_line(f"    {label:<4} {'pass' if pok else 'FAIL'}  {detail}")
