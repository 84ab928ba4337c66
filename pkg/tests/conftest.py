import pytest

from defgraph import load_bundled_gps


@pytest.fixture(scope="session")
def gps():
    return load_bundled_gps()
