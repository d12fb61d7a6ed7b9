import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mmchar.tensor import ChannelTensor


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_tensor(rng, n=10, f=2, m=4, position_id="p0"):
    data = rng.standard_normal((n, f, m)) + 1j * rng.standard_normal((n, f, m))
    return ChannelTensor(position_id, data)
