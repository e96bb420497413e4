"""Shared fixtures and the --runslow switch for acceptance-scale tests."""
import pytest

from pbecfr.config import get_settings
from pbecfr.game import Game
from pbecfr.games import fixtures


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run acceptance-scale tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Each test sees settings rebuilt from its own environment."""
    for name in ("EFG_LOG", "EFG_MAX_NODES", "EFG_TOL", "EFG_BARGAIN_MAX_DRAWS"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def figure1() -> Game:
    return fixtures.figure1()


@pytest.fixture
def figure3() -> Game:
    return fixtures.figure3()


@pytest.fixture
def pennies() -> Game:
    return fixtures.matching_pennies()


@pytest.fixture
def three_player() -> Game:
    return fixtures.assessments_example()


@pytest.fixture
def hidden_draw() -> Game:
    return fixtures.hidden_draw()
