import os
import re

import pytest

# keep thread-pool sizes deterministic across machines unless the user sets them
os.environ.setdefault("CASIMIR_THREADS", "1")

_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_KEY] = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for the acceptance summary."""
    log = request.config.stash[_KEY]

    def _report(cid, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {cid}: {detail}"
        log.append(line)
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
    # roll sub-clauses (C4a, C4b, ...) up to their criterion
    status = {}
    for line in lines:
        cid = line.split("]", 1)[1].split(":", 1)[0].strip()
        num = int(re.match(r"C(\d+)", cid).group(1))
        status[num] = status.get(num, True) and line.startswith("[PASS]")
    terminalreporter.write_line(
        "criteria: " + ", ".join(f"{k} {'PASS' if v else 'FAIL'}" for k, v in sorted(status.items()))
    )
