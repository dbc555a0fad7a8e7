import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion_line(capsys):
    """Record and print the one-line verdict of an acceptance criterion."""

    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
