"""Shared test configuration and the acceptance-criteria summary."""

from hypothesis import settings

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

# criterion number -> short title, collected from markers at collection time
_titles = {}
# criterion number -> True while every associated test passed
_results = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, title): ties a test to a numbered acceptance criterion",
    )


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            num, title = mark.args
            _titles[num] = title
            item.user_properties.append(("criterion", num))


def pytest_runtest_logreport(report):
    for name, num in report.user_properties:
        if name != "criterion":
            continue
        _results.setdefault(num, True)
        if report.failed or (report.skipped and report.when == "call"):
            _results[num] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        status = "PASS" if _results[num] else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {_titles[num]}: {status}")
