import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, title): exit criterion this test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when not in ("setup", "call"):
        return
    cid, title = marker.args
    entry = _CRITERIA.setdefault(cid, {"title": title, "passed": 0, "failed": [], "ran": False})
    if report.when == "call":
        entry["ran"] = True
    if report.failed:
        entry["failed"].append(item.name)
    elif report.when == "call" and report.passed:
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: int(c[1:])):
        e = _CRITERIA[cid]
        status = "FAIL" if e["failed"] else ("PASS" if e["ran"] else "SKIP")
        line = f"[{status}] {cid} {e['title']} ({e['passed']} passed, {len(e['failed'])} failed)"
        terminalreporter.write_line(line)
        for name in e["failed"]:
            terminalreporter.write_line(f"         failed: {name}")


@pytest.fixture
def diced_vectors():
    """Vectors for the diced/cubed pattern: all within 0.7 of the centroid,
    'with knife' below 0.9."""
    return {
        "diced": [1.0, 0.2, 0.0],
        "cubed": [1.0, 0.3, 0.1],
        "squares": [0.9, 0.4, 0.0],
        "with knife": [0.6, 0.0, 0.5],
        "into cubes": [1.0, 0.3, 0.2],
    }
