import numpy as np
import pytest

from tokcast.tokenizer import Frame


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_frame(rng, width=16, height=16, channels=1):
    return Frame(rng.integers(0, 256, (height, width, channels), dtype=np.uint8))


@pytest.fixture
def make_frame(rng):
    def make(width=16, height=16, channels=1):
        return random_frame(rng, width, height, channels)
    return make
