"""Shared fixtures for the matern_cardinal test suite."""

import logging

import pytest

from matern_cardinal.app.cardinal.lagrange import lagrange_function
from matern_cardinal.app.kernels.kernels import compact_spec, matern_spec


@pytest.fixture(autouse=True)
def home(tmp_path, monkeypatch):
    """Keep log files of the CLI out of the real home directory."""
    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    monkeypatch.delenv("MATERN_CARDINAL_THREADS", raising=False)
    yield tmp_path / "home"
    logging.captureWarnings(False)
    for name in ("matern_cardinal", "py.warnings"):
        logger = logging.getLogger(name)
        for handler in list(logger.handlers):
            handler.close()
        logger.handlers.clear()


@pytest.fixture(scope="session")
def matern11():
    return matern_spec(1, 1)


@pytest.fixture(scope="session")
def matern21():
    return matern_spec(2, 1)


@pytest.fixture(scope="session")
def matern22():
    return matern_spec(2, 2)


@pytest.fixture(scope="session")
def eta2():
    return compact_spec("eta2")


@pytest.fixture(scope="session")
def lagrange11(matern11):
    return lagrange_function(matern11, 0.25)


@pytest.fixture(scope="session")
def lagrange21(matern21):
    return lagrange_function(matern21, 0.25)


@pytest.fixture(scope="session")
def lagrange22(matern22):
    return lagrange_function(matern22, 0.5, grid_size=32)
