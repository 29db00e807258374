import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from diffsys.curves import HyperellipticCurve, PlaneQuartic


@pytest.fixture(scope="session")
def genus2_curve():
    return HyperellipticCurve.from_integers([0, 1, 2, 3, 4])


@pytest.fixture(scope="session")
def genus3_curve():
    return HyperellipticCurve.from_integers([0, 1, 2, 3, 4, 5, 6])


@pytest.fixture(scope="session")
def fermat_quartic():
    return PlaneQuartic.fermat()


@pytest.fixture(scope="session")
def klein_quartic():
    return PlaneQuartic.klein()
