import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from impulsekit.trajectory import Trajectory


def random_trajectory(rng: np.random.Generator, n_min=5, n_max=120,
                      jitter_dt=True, integer_ms=False) -> Trajectory:
    """A messy but valid trajectory: irregular cadence, wandering path."""
    n = int(rng.integers(n_min, n_max + 1))
    if integer_ms:
        dt = rng.integers(4, 41, size=n - 1).astype(float)
    elif jitter_dt:
        dt = rng.uniform(4.0, 40.0, size=n - 1)
    else:
        dt = np.full(n - 1, 16.0)
    t = np.concatenate([[0.0], np.cumsum(dt)])
    x = np.cumsum(rng.normal(0.0, 0.02, size=n)) + rng.uniform(-0.5, 0.5)
    y = np.cumsum(rng.normal(0.0, 0.02, size=n)) + rng.uniform(-0.8, 0.2)
    return Trajectory(np.column_stack([t, x, y]),
                      start=(float(x[0]), float(y[0])),
                      target=(float(rng.uniform(-0.7, 0.7)), float(rng.uniform(0.3, 0.9))))


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)
