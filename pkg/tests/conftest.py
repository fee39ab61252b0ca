import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


_CRITERIA = {}


def pytest_runtest_logreport(report):
    # a criterion fails if any phase (setup, call, teardown) of its tests fails
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    num, title = props["criterion"]
    entry = _CRITERIA.setdefault(num, {"title": title, "ok": True, "details": []})
    entry["ok"] = entry["ok"] and report.outcome == "passed"
    if report.when == "call":
        entry["details"] += [v for k, v in report.user_properties if k == "detail"]


@pytest.fixture(autouse=True)
def _criterion_tag(request):
    mark = request.node.get_closest_marker("criterion")
    if mark is not None:
        request.node.user_properties.append(("criterion", tuple(mark.args)))


@pytest.fixture
def detail(request):
    """Attach a one-line measurement to the acceptance summary."""
    def add(text):
        request.node.user_properties.append(("detail", text))
    return add


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        line = f"criterion {num:2d} {'PASS' if e['ok'] else 'FAIL'}  {e['title']}"
        if e["details"]:
            line += "  [" + "; ".join(e["details"]) + "]"
        terminalreporter.write_line(line)
