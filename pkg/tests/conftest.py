from collections import defaultdict

import pytest

N_CRITERIA = 8

# criterion number -> [(passed, detail), ...]; filled in by test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = defaultdict(list)


@pytest.fixture
def record():
    def _record(number: int, passed: bool, detail: str) -> bool:
        ACCEPTANCE[number].append((bool(passed), detail))
        return bool(passed)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in range(1, N_CRITERIA + 1):
        checks = ACCEPTANCE.get(number)
        if not checks:
            terminalreporter.write_line(f"criterion {number}: NOT RUN")
            continue
        status = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        detail = "; ".join(d for _, d in checks)
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")


def pytest_runtest_logreport(report):
    # the criterion 8 property tests record themselves by name
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_c8_"):
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        ACCEPTANCE[8].append((report.passed, f"{name[8:]} {'ok' if report.passed else 'failed'}"))
