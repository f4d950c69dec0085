import numpy as np
import pytest

from itilink.ofdm import OfdmConfig, symmetric_used_subcarriers


@pytest.fixture
def desk_cfg():
    """Desk-scale numerology used throughout: N=256, 150 used bins, CP 18."""
    return OfdmConfig(n_fft=256, n_cp=18,
                      used_subcarriers=symmetric_used_subcarriers(256, 150),
                      sample_rate_hz=3.84e6, frame_period_p=7)


@pytest.fixture
def rng():
    return np.random.default_rng(0xD35C)
