import pytest
from hypothesis import settings

from hegame import HgcrpInstance, Instance

ACCEPTANCE_LINES = pytest.StashKey[list]()

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def alice_bob():
    return Instance(("Alice", "Bob"), ("Python", "Java", "SQL"), [[1, 3, 3], [3, 3, 1]], 2)


@pytest.fixture
def lonely_pair():
    """Two-agent game where agent 2 prefers being alone."""
    return HgcrpInstance.from_table(["1", "2"], None, {"1": 1, "1,2": 2, "2": 3})


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
