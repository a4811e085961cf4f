import pytest

from secureq.gamefile import bundled_game, parse_game_file

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fig1():
    return parse_game_file(bundled_game("fig1.game"))


@pytest.fixture(scope="session")
def fig1_path():
    return str(bundled_game("fig1.game"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
