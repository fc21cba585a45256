"""Shared test plumbing: collects acceptance-criterion verdicts so the
run prints one PASS/FAIL line per criterion after the pytest summary."""

CRITERION_LINES: list[str] = []


def record_criterion(name: str, ok: bool, detail: str):
    CRITERION_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in CRITERION_LINES:
        terminalreporter.write_line(line)
