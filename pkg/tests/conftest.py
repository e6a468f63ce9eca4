"""Shared pytest hooks: one PASS/FAIL line per acceptance criterion."""

import re
from collections import OrderedDict

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results: "OrderedDict[int, dict]" = OrderedDict()


def _entry(nodeid):
    m = _CRITERION.search(nodeid)
    if m is None:
        return None
    return _results.setdefault(int(m.group(1)), {"ok": True, "ran": False, "notes": [], "doc": ""})


@pytest.fixture
def note(request):
    """Attach a measured value to the acceptance summary line of this test."""
    entry = _entry(request.node.nodeid)

    def add(text):
        if entry is not None:
            entry["notes"].append(str(text))

    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    entry = _entry(item.nodeid)
    if entry is None:
        return
    doc = (getattr(item, "function", None).__doc__ or "").strip().splitlines()
    if doc and not entry["doc"]:
        entry["doc"] = doc[0]
    if rep.when == "call":
        entry["ran"] = True
    if rep.failed or (rep.skipped and rep.when == "call"):
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_results):
        e = _results[k]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        line = f"criterion {k:2d}: {status}  {e['doc']}"
        if e["notes"]:
            line += "  [" + "; ".join(e["notes"]) + "]"
        tr.write_line(line)
