from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures" / "paper_text"


def normalize(text: str) -> str:
    return "\n".join(line.rstrip() for line in text.splitlines()).rstrip()


def paper_text(name: str) -> str:
    return normalize((FIXTURES / f"{name}.txt").read_text(encoding="utf-8"))


@pytest.fixture
def paper():
    return paper_text


# acceptance verdicts, printed after the run whatever the outcome
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
