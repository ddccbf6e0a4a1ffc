import sys


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if acceptance and acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance.LINES:
            terminalreporter.write_line(line)
