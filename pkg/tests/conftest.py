import math

import numpy as np
import pytest

import floqab


@pytest.fixture
def agg():
    """Reference square tetramer, all default parameters."""
    return floqab.square_tetramer()


@pytest.fixture
def drive():
    """Default drive: standard amplitude, 10% red detuning, linear x."""
    return floqab.DriveSpec(e0=2.7e8, detuning=-38.5, phi_x=0.0, phi_y=0.0)


@pytest.fixture
def coarse_probe():
    """Reduced-resolution grid for fast spectral tests."""
    return floqab.ProbeSpec.default(step=2.0)


def circ_diff(a: float, b: float) -> float:
    """Absolute distance between two angles on the circle."""
    return abs(math.remainder(a - b, 2.0 * math.pi))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
