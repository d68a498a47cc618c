"""Main test configuration and fixtures.

Provides the option ``--full``, which raises the number of random instances per check
to the sizes used for release testing, and the fixtures :func:`.trials` and
:func:`.seed` that tests use to size and seed their random instance families.

"""
from __future__ import annotations

import configparser
from typing import Iterator

import pytest
from faker import Faker
from pytest_cases import fixture

from _spfacility.oracles import _oracle_cache


class TrialCounts:
    """Number of random instances per check, reduced unless ``--full`` is given."""

    def __init__(self, full: bool) -> None:
        self.full = full

    def __call__(self, full_count: int, reduced_count: int = 10) -> int:
        """Return *full_count* in a full run, *reduced_count* otherwise."""
        return full_count if self.full else min(full_count, reduced_count)


def pytest_addoption(parser: pytest.Parser) -> None:
    """Add our custom options to the pytest option parser."""
    parser.addoption(
        "--full",
        action="store_true",
        default=False,
        help="Check the full number of random instances. Slow.",
    )


@fixture(scope="session")
def user_config(
    pytestconfig: pytest.Config,
) -> configparser.ConfigParser:
    """Read pytest.ini again to retrieve extra values provided by the user."""
    ini_path = pytestconfig.inipath
    config = configparser.ConfigParser()
    if ini_path:
        config.read(ini_path)
    return config


@fixture(scope="session")
def seed(user_config: configparser.ConfigParser) -> int:
    """Return the seed of random instance families, 0 unless set in pytest.ini."""
    return user_config.getint("spfacility", "seed", fallback=0)


@fixture(scope="session")
def trials(pytestconfig: pytest.Config) -> TrialCounts:
    """Return the trial count selector for this run."""
    return TrialCounts(bool(pytestconfig.getoption("full")))


@pytest.fixture(scope="session")
def faker() -> Faker:
    """Return a session-scoped faker instance.

    The default faker fixture is function-scoped and can not be used
    in higher-scoped fixtures.

    :returns: the faker fixture
    """
    return Faker()


@pytest.fixture
def cold_oracle() -> Iterator[None]:
    """Run a test with an empty oracle cache."""
    _oracle_cache.clear()
    yield
    _oracle_cache.clear()
