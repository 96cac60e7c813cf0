import pytest

_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Append ``(criterion, passed, detail)``; printed in the terminal summary."""
    lines = request.config.stash.setdefault(_LINES, [])

    def record(number, passed, detail):
        lines.append((number, passed, detail))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(lines, key=lambda x: x[0]):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
