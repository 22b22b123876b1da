import pytest

# Filled by test_acceptance.py: criterion number -> (passed, one-line detail).
ACCEPTANCE = {}


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="data.csv"):
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write


@pytest.fixture
def criterion():
    def record(number, passed, detail):
        ACCEPTANCE[number] = (bool(passed), detail)
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        return line
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
