import numpy as np
import pytest

from afcsim import IonParameters, make_grid


@pytest.fixture
def ions():
    # coherence time 700 ns -> homogeneous FWHM ~455 kHz
    return IonParameters(t2_s=700e-9, t1_s=1e-4)


@pytest.fixture
def grid_small():
    return make_grid(50e6, 1024)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
