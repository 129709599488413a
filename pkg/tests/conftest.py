import pytest

_acceptance_lines = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the caller still asserts."""
    def record(number, title, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        _acceptance_lines.append((number, f"[{status}] criterion {number:>2}: {title}  {detail}".rstrip()))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_acceptance_lines, key=lambda x: x[0]):
        terminalreporter.write_line(line)
