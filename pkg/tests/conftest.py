import pytest

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


class CriterionRecorder:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.done = False

    def report(self, ok: bool, detail: str) -> None:
        self.done = True
        line = f"{'PASS' if ok else 'FAIL'} criterion {self.number}: {self.title} ({detail})"
        _ACCEPTANCE[self.number] = (ok, line)
        print(line)


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    rec = CriterionRecorder(*marker.args)
    yield rec
    if not rec.done:
        rec.report(False, "raised before reporting")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number][1])
