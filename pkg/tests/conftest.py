import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gtdkit import kerr_newman, reissner_nordstrom_d


@pytest.fixture(scope="session")
def kn():
    return kerr_newman()


@pytest.fixture(scope="session")
def rn4():
    return reissner_nordstrom_d(4)


@pytest.fixture(scope="session")
def rn5():
    return reissner_nordstrom_d(5)
