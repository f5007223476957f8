import pytest

from decaylab import derive_params


@pytest.fixture(scope="session")
def params():
    return derive_params()
