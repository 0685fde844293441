"""Per-criterion PASS/FAIL summary for the acceptance suite.

Tests carrying ``@pytest.mark.criterion(n)`` are grouped by ``n``. A
criterion passes only when every one of its tests passes.
"""
from collections import defaultdict

_results: dict[int, list[tuple[str, bool]]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _results[marker.args[0]].append((item.name, call.excinfo is None))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        failed = [name for name, ok in _results[n] if not ok]
        status = "PASS" if not failed else "FAIL"
        detail = f" (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {n:2d}: {status}  [{len(_results[n])} checks]{detail}")
