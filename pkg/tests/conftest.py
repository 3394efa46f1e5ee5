import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[int, bool] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.failed:
        n = int(m.group(1))
        _CRITERIA[n] = _CRITERIA.get(n, True) and not report.failed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if _CRITERIA[n] else 'FAIL'}")
