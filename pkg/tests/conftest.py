import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by this test")


@pytest.fixture
def note(request):
    """Attach a short measurement to the acceptance summary line of this test."""

    def add(text):
        request.node.user_properties.append(("note", text))

    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = mark.args
        entry = _CRITERIA.setdefault(number, {"title": title, "failed": [], "notes": []})
        if not rep.passed:
            entry["failed"].append(item.name)
        entry["notes"].extend(v for k, v in item.user_properties if k == "note")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if not e["failed"] else "FAIL"
        line = f"criterion {number:2d} {status}  {e['title']}"
        if e["failed"]:
            line += "  [failed: " + ", ".join(e["failed"]) + "]"
        terminalreporter.write_line(line)
        for n in e["notes"]:
            terminalreporter.write_line(f"               {n}")
