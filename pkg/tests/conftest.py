import pytest

from csicut.dataset import TABLE3_PROFILE, generate_synthetic

# (criterion, verdict, detail) lines collected by test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def synthetic_cohort():
    return generate_synthetic(TABLE3_PROFILE, seed=7)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
