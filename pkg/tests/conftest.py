import os
import sys
import time

sys.path.insert(0, os.path.dirname(__file__))

import acceptance_log  # noqa: E402

_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_log.summary_lines(time.perf_counter() - _START)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
