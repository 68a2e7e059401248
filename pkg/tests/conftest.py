import hypothesis
import numpy as np
import pytest

from minqrng.lut import build_table
from minqrng.source_sim import DetectorModel, SourceConfig, simulate_tags

hypothesis.settings.register_profile("fast", max_examples=20)
hypothesis.settings.register_profile("thorough", max_examples=500)


@pytest.fixture(scope="session")
def device_table():
    return build_table(4, 10)


@pytest.fixture(scope="session")
def device_stream():
    """One second of the device configuration: 1.2e6/s, 40 ns recovery, 200 Hz dark."""
    return simulate_tags(SourceConfig(duration=1.0, rng_seed=2024), DetectorModel())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
