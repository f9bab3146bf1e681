"""NumPy implementations of the per-trajectory feature kernels.

Fallback backend used when the compiled extension is unavailable; semantics
are identical to ``_ckernels``. Inputs are contiguous float64 arrays that
have already been validated (finite, strictly increasing timestamps).
Timestamps are milliseconds; speeds come back in units/second.
"""

import numpy as np

BACKEND = "python"


def path_length(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(np.hypot(np.diff(x), np.diff(y))))


def segment_speeds(t: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    d = np.hypot(np.diff(x), np.diff(y))
    return 1000.0 * d / np.diff(t)


def max_segment_speed(t: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    return float(np.max(segment_speeds(t, x, y)))


def max_accel(t: np.ndarray, x: np.ndarray, y: np.ndarray, time_normalized: bool) -> float:
    v = segment_speeds(t, x, y)
    dv = np.diff(v)
    if time_normalized:
        # midpoint-to-midpoint interval of adjacent segments, in seconds
        dv = dv / ((t[2:] - t[:-2]) / 2000.0)
    return float(np.max(dv))


def chord_auc(x: np.ndarray, y: np.ndarray,
              sx: float, sy: float, ex: float, ey: float) -> float:
    ux, uy = ex - sx, ey - sy
    norm = np.hypot(ux, uy)
    ux, uy = ux / norm, uy / norm
    # progress along the chord and signed deviation ("above" = left of start->end)
    rx, ry = x - sx, y - sy
    s = rx * ux + ry * uy
    d = -rx * uy + ry * ux
    return float(np.sum(0.5 * (d[:-1] + d[1:]) * np.diff(s)))


def distance_after(t: np.ndarray, x: np.ndarray, y: np.ndarray, onset: float) -> float:
    d = np.hypot(np.diff(x), np.diff(y))
    t0, t1 = t[:-1], t[1:]
    # full length for segments starting at/after onset, time-linear share of
    # the straddling segment, nothing before
    frac = np.clip((t1 - onset) / (t1 - t0), 0.0, 1.0)
    return float(np.sum(d * frac))
