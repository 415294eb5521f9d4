import sys
from pathlib import Path

import pytest

from tsgn import accel

sys.path.insert(0, str(Path(__file__).parent))  # make `oracles` importable


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    """Run a test under each kernel backend, restoring the default after."""
    if request.param == "numba" and not accel.HAS_NUMBA:
        pytest.skip("numba unavailable")
    previous = accel.backend()
    accel.set_backend(request.param)
    yield request.param
    accel.set_backend(previous)
