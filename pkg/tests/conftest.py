import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# make the helper modules next to the tests importable
sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
