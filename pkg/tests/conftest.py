import pytest

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {criterion} [{'PASS' if ok else 'FAIL'}] {title}" + (f" :: {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
