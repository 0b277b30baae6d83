import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wpnoma.params import baseline_params


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def base():
    return baseline_params()


@pytest.fixture
def scaled():
    """Baseline with the harvest threshold lifted so the selection radius
    lands near 0.05 km and guard windows stay small.  The stock threshold
    is so low that fading alone carries every in-cell user over it."""
    return baseline_params(E_th=2827.433388230814)
