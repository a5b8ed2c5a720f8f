import pytest

from bqscatter.potentials import builtin


@pytest.fixture(scope="session")
def bump():
    """The compactly supported reference pair used throughout the suite."""
    return builtin("bump")


@pytest.fixture(scope="session")
def zero_data():
    return builtin("zero")
