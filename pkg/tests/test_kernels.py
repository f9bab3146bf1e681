"""Backend parity: the compiled kernels and the NumPy fallback must agree."""

import numpy as np
import pytest

from impulsekit import kernels
from conftest import random_trajectory

BACKENDS = kernels.available_backends()


def test_compiled_backend_is_present():
    # the build environment has a compiler; a missing extension here means
    # the build silently fell back, which the benchmark would then hide
    assert "cython" in BACKENDS


@pytest.mark.parametrize("seed", range(5))
def test_backends_agree_on_random_trajectories(seed):
    rng = np.random.default_rng(900 + seed)
    mods = list(BACKENDS.values())
    if len(mods) < 2:
        pytest.skip("only one backend built")
    a, b = mods[0], mods[1]
    for _ in range(100):
        traj = random_trajectory(rng)
        t, x, y = traj.t, traj.x, traj.y
        onset = float(rng.uniform(0, t[-1] * 1.05))
        sx, sy = traj.start
        ex, ey = traj.target
        assert a.path_length(x, y) == pytest.approx(b.path_length(x, y), rel=1e-12)
        assert a.max_segment_speed(t, x, y) == pytest.approx(
            b.max_segment_speed(t, x, y), rel=1e-12)
        for flag in (True, False):
            assert a.max_accel(t, x, y, flag) == pytest.approx(
                b.max_accel(t, x, y, flag), rel=1e-12, abs=1e-12)
        assert a.chord_auc(x, y, sx, sy, ex, ey) == pytest.approx(
            b.chord_auc(x, y, sx, sy, ex, ey), rel=1e-12, abs=1e-15)
        assert a.distance_after(t, x, y, onset) == pytest.approx(
            b.distance_after(t, x, y, onset), rel=1e-12, abs=1e-15)


def test_env_override_selects_python():
    import os
    import subprocess
    import sys
    env = dict(os.environ, IMPULSEKIT_KERNELS="python")
    out = subprocess.run(
        [sys.executable, "-c",
         "from impulsekit import kernels; print(kernels.backend_name())"],
        env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
