"""Shared pytest fixtures for mixv tests."""
import logging
from pathlib import Path

import pytest

import guards
from config import Config

FIXTURES = Path(__file__).parent / "fixtures"

_CONFIG_FIELDS = ['LOG_LEVEL', 'MAX_ENUM', 'ENUM_CHUNK', 'ENUM_WORKERS', 'POINT_MASS_LIMIT',
                  'DENOMINATOR_BOUND', 'GADGET_MAX_MAGNITUDE', 'EPS_SPLIT', 'IDENTITY_TOL',
                  'DATABASE_PATH', 'RECORD_RUNS']


@pytest.fixture(autouse=True)
def restore_config():
    """Every test starts from the same Config and a fresh guard-warning memo."""
    saved = {name: getattr(Config, name) for name in _CONFIG_FIELDS}
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    Config.MAX_ENUM = None
    Config.RECORD_RUNS = False
    guards._warned.clear()
    yield
    for name, value in saved.items():
        setattr(Config, name, value)
    guards._warned.clear()
    # main() attaches a stderr handler bound to the test's captured stream
    root.handlers[:] = [handler for handler in root.handlers
                        if handler in handlers or type(handler) is not logging.StreamHandler]
    root.setLevel(level)


@pytest.fixture
def fixture_path():
    def resolve(name: str) -> str:
        return str(FIXTURES / name)
    return resolve
