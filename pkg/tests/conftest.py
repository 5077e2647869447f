"""Package-wide test fixtures."""
from _pytest.config import Config
import pytest

from pricequery.io import load_config


def pytest_configure(config: Config) -> None:
    """Pytest configuration hook."""
    config.addinivalue_line("markers", "e2e: mark as end-to-end test.")


@pytest.fixture(name="builtins", scope="session")
def load_builtin_distributions():
    return load_config()["builtin_distributions"]
