"""Cursor-trajectory feature extraction.

Five per-trial measures computed on raw pointer samples (no resampling or
time normalization): total path length, peak velocity, peak acceleration,
signed area between path and chord, and distance traveled after stop-signal
onset. Coordinates live in the normalized screen frame ((0,0) center,
(1,1) top-right); timestamps are milliseconds from trial onset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from impulsekit import kernels
from impulsekit.errors import (
    DegenerateChord,
    MonotonicityError,
    NonPositiveInterval,
    NotAStopTrial,
    TooFewSamples,
)

Point = Tuple[float, float]

DEFAULT_START: Point = (0.0, -0.8)

# default acceleration convention; "raw_difference" keeps the bare velocity
# change without dividing by the inter-segment interval
ACCEL_MODES = ("time_normalized", "raw_difference")


@dataclass(frozen=True)
class PointerSample:
    """One pointer observation: t in ms since trial onset, x/y normalized."""

    t: float
    x: float
    y: float


class Trajectory:
    """Ordered pointer samples for one trial.

    Timestamps must be finite, non-negative, and strictly increasing;
    violations raise at construction so corrupt logs fail loudly instead of
    being silently repaired.
    """

    __slots__ = ("t", "x", "y", "start", "target")

    def __init__(self,
                 samples: Sequence[Tuple[float, float, float]],
                 start: Point = DEFAULT_START,
                 target: Optional[Point] = None):
        arr = np.asarray(samples, dtype=np.float64)
        if arr.ndim != 2 or (arr.size and arr.shape[1] != 3):
            raise ValueError("samples must be (t, x, y) triples")
        if arr.size == 0:
            arr = arr.reshape(0, 3)
        t = np.ascontiguousarray(arr[:, 0])
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite sample values")
        if t.size and t[0] < 0:
            raise ValueError("negative timestamp")
        if t.size >= 2 and not np.all(np.diff(t) > 0):
            i = int(np.argmin(np.diff(t)))
            raise MonotonicityError(
                f"timestamps not strictly increasing at sample {i + 1} "
                f"(t={t[i]:g} -> t={t[i + 1]:g})")
        self.t = t
        self.x = np.ascontiguousarray(arr[:, 1])
        self.y = np.ascontiguousarray(arr[:, 2])
        self.start = (float(start[0]), float(start[1]))
        self.target = None if target is None else (float(target[0]), float(target[1]))

    def __len__(self) -> int:
        return self.t.size

    @property
    def samples(self) -> list[PointerSample]:
        return [PointerSample(float(t), float(x), float(y))
                for t, x, y in zip(self.t, self.x, self.y)]

    def last_point(self) -> Point:
        if not len(self):
            raise TooFewSamples("empty trajectory")
        return (float(self.x[-1]), float(self.y[-1]))

    def _require(self, n: int, what: str):
        if len(self) < n:
            raise TooFewSamples(f"{what} needs >= {n} samples, got {len(self)}")


@dataclass
class FeatureVector:
    """Per-trial motion features; stopping_distance only on stop trials."""

    total_distance: float
    max_velocity: float
    max_acceleration: float
    auc: float
    stopping_distance: Optional[float] = None
    auc_chord_fallback: bool = field(default=False)


def total_distance(traj: Trajectory) -> float:
    """Path length: sum of Euclidean distances between consecutive samples."""
    traj._require(2, "total_distance")
    return kernels.path_length(traj.x, traj.y)


def max_velocity(traj: Trajectory) -> float:
    """Largest segment speed, units/second, using actual inter-sample dt."""
    traj._require(2, "max_velocity")
    if np.any(np.diff(traj.t) <= 0):
        raise NonPositiveInterval("non-positive inter-sample interval")
    return kernels.max_segment_speed(traj.t, traj.x, traj.y)


def max_acceleration(traj: Trajectory, mode: str = "time_normalized") -> float:
    """Largest velocity change between adjacent segments.

    time_normalized divides by the midpoint-to-midpoint interval (units/s^2);
    raw_difference reports the bare change (units/s per step).
    """
    if mode not in ACCEL_MODES:
        raise ValueError(f"mode must be one of {ACCEL_MODES}, not {mode!r}")
    traj._require(3, "max_acceleration")
    return kernels.max_accel(traj.t, traj.x, traj.y, mode == "time_normalized")


def area_under_curve(traj: Trajectory, chord_start: Point, chord_end: Point) -> float:
    """Signed area between the path and the chord, in the chord-aligned frame.

    Positive = net area on the left of the start->end direction. Computed as
    the trapezoidal integral of perpendicular deviation over chord progress.
    """
    traj._require(2, "area_under_curve")
    sx, sy = chord_start
    ex, ey = chord_end
    if math.hypot(ex - sx, ey - sy) < 1e-12:
        raise DegenerateChord(f"chord endpoints coincide: {chord_start}")
    return kernels.chord_auc(traj.x, traj.y, sx, sy, ex, ey)


def stopping_distance(traj: Trajectory, stop_onset: float) -> float:
    """Path length traveled at/after stop_onset (ms).

    Segments entirely past the onset count in full; the straddling segment
    contributes its time-linear share; 0 if the trajectory ends earlier.
    """
    if stop_onset < 0:
        raise ValueError("stop_onset must be >= 0")
    traj._require(2, "stopping_distance")
    return kernels.distance_after(traj.t, traj.x, traj.y, stop_onset)


def trial_features(trial, accel_mode: str = "time_normalized") -> FeatureVector:
    """All five features for one TrialRecord.

    The AUC chord runs from the trial start position to the center of the
    clicked response region; with no recorded click it falls back to the
    last sample and flags the row. Stopping distance is computed for stop
    trials only.
    """
    traj = trial.trajectory
    fallback = traj.target is None
    chord_end = traj.last_point() if fallback else traj.target
    try:
        auc = area_under_curve(traj, traj.start, chord_end)
    except DegenerateChord:
        if not fallback:
            raise
        auc = 0.0  # cursor never left the start position
    sd = None
    if getattr(trial, "kind", None) == "stop":
        sd = stopping_distance_for_trial(trial)
    return FeatureVector(
        total_distance=total_distance(traj),
        max_velocity=max_velocity(traj),
        max_acceleration=max_acceleration(traj, accel_mode),
        auc=auc,
        stopping_distance=sd,
        auc_chord_fallback=fallback,
    )


def stopping_distance_for_trial(trial) -> float:
    """Stopping distance via the trial-level API; go trials are an error."""
    if getattr(trial, "kind", None) != "stop" or trial.ssd is None:
        raise NotAStopTrial(f"trial {trial.trial_id} has no stop signal")
    return stopping_distance(trial.trajectory, float(trial.ssd))
