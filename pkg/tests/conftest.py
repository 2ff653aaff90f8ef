import pytest

_LINES = []


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.notes = number, title, []

    def note(self, text):
        self.notes.append(text)

    def finish(self, ok):
        line = f"criterion {self.number:>2} {'PASS' if ok else 'FAIL'}  {self.title}"
        if self.notes:
            line += "  [" + "; ".join(self.notes) + "]"
        print(line)
        _LINES.append(line)
        return ok


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
