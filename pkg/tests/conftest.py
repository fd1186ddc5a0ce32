import pytest

# (criterion id, passed, detail) appended by tests/test_acceptance.py
ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    def record(cid: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE.append((cid, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid:<6} {detail}")
