"""Configuration file for pytest."""
import sys
from pathlib import Path

import pytest

# Add the src directory to the Python path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running sweeps and quadratures")


@pytest.fixture
def pres51():
    """The 5/1 filling with a0 = 0."""
    from qvol.cfrac import SurgeryPresentation

    return SurgeryPresentation.from_slope(5, 1, 0)


@pytest.fixture
def pres52():
    """The 5/2 filling with a0 = 0."""
    from qvol.cfrac import SurgeryPresentation

    return SurgeryPresentation.from_slope(5, 2, 0)
