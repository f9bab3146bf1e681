"""Seeded synthetic-participant generator.

Sessions come out in the canonical log format with a known ground truth, so
every estimator in the toolkit can be scored against the parameters that
generated its input. The stop-signal task follows an independent horse-race
model (the regime where the integration method is unbiased); cursor paths
are minimum-jerk profiles along a half-sine bump, which gives closed-form
feature oracles (peak speed 1.875*L/T, area 2*curvature*L/pi).

Determinism: all output is a pure function of (params, spec, seeds).
Per-subject streams derive from the master seed as
SeedSequence([master_seed, subject_index, stream]), so parallel generation
reproduces sequential output byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from impulsekit import discounting
from impulsekit.errors import InvalidParams, InvalidSpec
from impulsekit.metrics import COHERENCE_SET, RESPONSE_WINDOW_MS, SSD_SET, TrialRecord
from impulsekit.sessionlog import SessionLog
from impulsekit.trajectory import DEFAULT_START, Trajectory

SYNTHETIC_TIMESTAMP = "2000-01-01T00:00:00Z"
BUTTONS = {"left": (-0.6, 0.6), "right": (0.6, 0.6)}
SAMPLE_INTERVAL_MS = 16.0

# RNG stream indices under each subject's seed
_STREAM_PARAMS = 0
_STREAM_SST = 1
_STREAM_DDT = 2


@dataclass(frozen=True)
class SubjectParams:
    """Generative parameters for one synthetic subject.

    go_rt_* parameterize the ex-Gaussian go-finish time; ssrt_true is the
    stop-process latency (math.inf disables stopping entirely) with ssrt_sd
    its trial-to-trial SD (truncated at 0). motor_lag is how long movement
    continues after a successful stop. curvature is the half-sine bump
    amplitude; velocity_jitter the multiplicative SD of per-trial movement
    speed; move_fraction the share of the RT occupied by movement.

    The go-RT defaults are deliberately wide and centered so that the
    100-600 ms SSD window falls in the near-linear band of the go CDF
    (pooled response rate ~0.5): that is the regime where the pooled
    integration estimator is consistent, which the recovery oracles rely on.
    """

    go_rt_mu: float = 500.0
    go_rt_sigma: float = 250.0
    go_rt_tau: float = 100.0
    ssrt_true: float = 250.0
    ssrt_sd: float = 0.0
    motor_lag: float = 80.0
    k_true: float = 0.01
    beta_true: float = 5.0
    curvature: float = 0.10
    velocity_jitter: float = 0.10
    lapse_rate: float = 0.02
    move_fraction: float = 0.7

    def validate(self):
        for name in ("go_rt_mu", "go_rt_sigma", "go_rt_tau", "ssrt_sd",
                     "motor_lag", "velocity_jitter"):
            if getattr(self, name) < 0:
                raise InvalidParams(f"{name} must be >= 0")
        if not (self.ssrt_true >= 0):
            raise InvalidParams("ssrt_true must be >= 0 (math.inf disables stopping)")
        if not 0.0 <= self.lapse_rate <= 1.0:
            raise InvalidParams("lapse_rate must be in [0, 1]")
        if not 0.0 < self.move_fraction <= 1.0:
            raise InvalidParams("move_fraction must be in (0, 1]")
        if self.k_true <= 0 or self.beta_true <= 0:
            raise InvalidParams("k_true and beta_true must be positive")


@dataclass(frozen=True)
class CohortSpec:
    """Cohort-level design: trial counts, stop fraction, SSDs, blocks, seed."""

    n_subjects: int = 1
    trials_per_task: int = 200
    stop_fraction: float = 0.25           # 0.20 for the two-block design
    ssd_set: Tuple[int, ...] = SSD_SET
    condition_schedule: Tuple[str, ...] = ("neutral",)
    seed: int = 0
    coherence_set: Tuple[int, ...] = COHERENCE_SET
    response_window_ms: float = RESPONSE_WINDOW_MS
    sample_interval_ms: float = SAMPLE_INTERVAL_MS
    include_trajectories: bool = True     # False = minimal 2-sample stubs (fast)
    ddt_variant: str = "softmax_hyperbolic"

    def validate(self):
        if self.n_subjects < 0:
            raise InvalidSpec("n_subjects must be >= 0")
        if self.trials_per_task < 1:
            raise InvalidSpec("trials_per_task must be >= 1")
        if not 0.0 < self.stop_fraction < 1.0:
            raise InvalidSpec("stop_fraction must be in (0, 1)")
        if not self.ssd_set:
            raise InvalidSpec("ssd_set must be non-empty")
        if not self.condition_schedule:
            raise InvalidSpec("condition_schedule must be non-empty")


def subject_rng(master_seed: int, subject_index: int, stream: int) -> np.random.Generator:
    """The documented seed-splitting rule."""
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed), int(subject_index), int(stream)]))


def _ex_gaussian(rng: np.random.Generator, mu, sigma, tau) -> float:
    """Ex-Gaussian finish time, rounded to whole ms (the wire's clock
    resolution) and floored at 1 ms."""
    g = rng.normal(mu, sigma) if sigma > 0 else mu
    if tau > 0:
        g += rng.exponential(tau)
    return float(max(round(g), 1.0))


def _stop_latency(rng: np.random.Generator, params: SubjectParams) -> float:
    if math.isinf(params.ssrt_true):
        return math.inf
    if params.ssrt_sd == 0:
        return params.ssrt_true
    while True:  # normal truncated at 0
        s = rng.normal(params.ssrt_true, params.ssrt_sd)
        if s >= 0:
            return s


def minimum_jerk_progress(tau: np.ndarray) -> np.ndarray:
    """Normalized minimum-jerk position profile on [0, 1]."""
    tau = np.clip(tau, 0.0, 1.0)
    return tau ** 3 * (10.0 - 15.0 * tau + 6.0 * tau ** 2)


def bump_path_point(start, end, progress, curvature):
    """Point(s) on the half-sine-bump path at the given chord progress."""
    sx, sy = start
    ex, ey = end
    cx, cy = ex - sx, ey - sy
    length = math.hypot(cx, cy)
    nx, ny = -cy / length, cx / length   # left normal of the chord
    dev = curvature * np.sin(np.pi * progress)
    x = sx + cx * progress + nx * dev
    y = sy + cy * progress + ny * dev
    done = progress >= 1.0               # land on the button exactly
    return (np.where(done, ex, x), np.where(done, ey, y))


def minimum_jerk_trajectory(start, end, duration_ms: float,
                            curvature: float = 0.0,
                            sample_interval_ms: float = SAMPLE_INTERVAL_MS,
                            move_onset_ms: float = 0.0,
                            record_until_ms: Optional[float] = None,
                            freeze_at_ms: Optional[float] = None) -> Trajectory:
    """Sampled cursor path: still at `start` until move_onset_ms, then a
    minimum-jerk sweep of `duration_ms` along the bump path to `end`.

    Recording runs to record_until_ms (default: movement end) on the fixed
    sampling grid, with the exact endpoint appended when it falls off-grid.
    freeze_at_ms pins the cursor wherever it was at that instant (stop-signal
    truncation).
    """
    if duration_ms <= 0:
        raise InvalidParams("duration_ms must be positive")
    end_ms = move_onset_ms + duration_ms if record_until_ms is None else record_until_ms
    times = np.arange(0.0, end_ms + 1e-9, sample_interval_ms)
    if times.size == 0 or times[-1] < end_ms - 1e-9:
        times = np.append(times, end_ms)
    eff = times if freeze_at_ms is None else np.minimum(times, freeze_at_ms)
    progress = minimum_jerk_progress((eff - move_onset_ms) / duration_ms)
    xs, ys = bump_path_point(start, end, progress, curvature)
    samples = np.column_stack([times, xs, ys])
    return Trajectory(samples, start=start, target=None)


def _stub_trajectory(start) -> Trajectory:
    return Trajectory([[0.0, start[0], start[1]],
                       [SAMPLE_INTERVAL_MS, start[0], start[1]]], start=start)


def _movement(rng: np.random.Generator, params: SubjectParams, rt: float,
              button: Tuple[float, float], spec: CohortSpec,
              record_until: Optional[float] = None,
              freeze_at: Optional[float] = None) -> Trajectory:
    jitter = max(0.2, 1.0 + params.velocity_jitter * rng.standard_normal()) \
        if params.velocity_jitter > 0 else 1.0
    duration = min(rt, params.move_fraction * rt / jitter)
    onset = rt - duration
    traj = minimum_jerk_trajectory(DEFAULT_START, button, duration,
                                   curvature=params.curvature,
                                   sample_interval_ms=spec.sample_interval_ms,
                                   move_onset_ms=onset,
                                   record_until_ms=record_until,
                                   freeze_at_ms=freeze_at)
    return traj


def _block_slices(n_trials: int, schedule: Sequence[str]):
    base, extra = divmod(n_trials, len(schedule))
    sizes = [base + (1 if i < extra else 0) for i in range(len(schedule))]
    out, at = [], 0
    for cond, size in zip(schedule, sizes):
        out.append((cond, at, at + size))
        at += size
    return out


def simulate_sst_session(params: SubjectParams, spec: CohortSpec,
                         subject_seed, subject_id: str = "sim") -> SessionLog:
    """One subject's stop-signal session under the independent race model.

    Stop trials get an exact per-block count round(stop_fraction * block);
    SSDs are drawn uniformly from spec.ssd_set. A trial is responded when
    the go finish beats both the stop finish and the response window.
    """
    params.validate()
    spec.validate()
    rng = np.random.default_rng(np.random.SeedSequence(subject_seed))
    cap = spec.response_window_ms
    trials: List[TrialRecord] = []

    for cond, lo, hi in _block_slices(spec.trials_per_task, spec.condition_schedule):
        block = hi - lo
        n_stop = int(round(spec.stop_fraction * block))
        kinds = np.array(["stop"] * n_stop + ["go"] * (block - n_stop))
        rng.shuffle(kinds)
        for j, kind in enumerate(kinds):
            idx = lo + j
            coherence = int(rng.choice(spec.coherence_set))
            direction = "left" if rng.random() < 0.5 else "right"
            g = _ex_gaussian(rng, params.go_rt_mu, params.go_rt_sigma, params.go_rt_tau)
            lapse = rng.random() < params.lapse_rate
            clicked = ("left" if rng.random() < 0.5 else "right") if lapse else direction

            ssd = None
            stop_finish = math.inf
            if kind == "stop":
                ssd = float(rng.choice(spec.ssd_set))
                stop_finish = ssd + _stop_latency(rng, params)

            responded = g < stop_finish and g <= cap
            button = BUTTONS[clicked]
            if not spec.include_trajectories:
                traj = _stub_trajectory(DEFAULT_START)
                if responded:
                    traj = Trajectory(
                        [[0.0, DEFAULT_START[0], DEFAULT_START[1]],
                         [g, button[0], button[1]]],
                        start=DEFAULT_START, target=button)
            elif responded:
                traj = _movement(rng, params, g, button, spec)
                traj.target = button
            else:
                # planned movement toward g, recorded to the cap, frozen when
                # the stop process (plus motor lag) catches the hand
                freeze = min(stop_finish + params.motor_lag, cap)
                traj = _movement(rng, params, g, button, spec,
                                 record_until=cap, freeze_at=freeze)

            trials.append(TrialRecord(
                trial_id=f"sst-{idx:04d}", task="sst", condition=cond,
                kind=str(kind), coherence=coherence, ssd=ssd,
                responded=bool(responded),
                rt=float(g) if responded else None,
                correct=(clicked == direction) if responded else None,
                trajectory=traj))
    return SessionLog(subject_id=subject_id, session="synthetic",
                      device="mouse", trials=trials,
                      created_at=SYNTHETIC_TIMESTAMP)


def simulate_ddt_session(params: SubjectParams, spec: CohortSpec,
                         subject_seed, subject_id: str = "sim") -> SessionLog:
    """One subject's delay-discounting session: the full 10x8 offer grid plus
    ten both-immediate control trials, shuffled, sides randomized."""
    params.validate()
    spec.validate()
    rng = np.random.default_rng(np.random.SeedSequence(subject_seed))

    offers = [(float(a), 0.0, discounting.AMOUNT_LL, float(d), False)
              for a in discounting.AMOUNTS_SS for d in discounting.DELAYS_LL]
    offers += [(float(a), 0.0, discounting.AMOUNT_LL, 0.0, True)
               for a in discounting.AMOUNTS_SS]
    order = rng.permutation(len(offers))

    n = len(offers)
    trials: List[TrialRecord] = []
    blocks = _block_slices(n, spec.condition_schedule)
    cond_of = {}
    for cond, lo, hi in blocks:
        for i in range(lo, hi):
            cond_of[i] = cond

    for idx, oi in enumerate(order):
        a_ss, d_ss, a_ll, d_ll, is_control = offers[oi]
        trial = discounting.ChoiceTrial(a_ss, d_ss, a_ll, d_ll,
                                        chosen="larger_later",
                                        is_control=is_control)
        p_ll = discounting.choice_probability(trial, params.k_true,
                                              params.beta_true, spec.ddt_variant)
        if rng.random() < params.lapse_rate:
            take_ll = rng.random() < 0.5
        else:
            take_ll = rng.random() < p_ll
        choice = "larger_later" if take_ll else "sooner_smaller"

        ll_side = "left" if rng.random() < 0.5 else "right"
        chosen_side = ll_side if take_ll else ("right" if ll_side == "left" else "left")
        button = BUTTONS[chosen_side]
        rt = _ex_gaussian(rng, params.go_rt_mu, params.go_rt_sigma, params.go_rt_tau)

        if spec.include_trajectories:
            traj = _movement(rng, params, rt, button, spec)
            traj.target = button
        else:
            traj = Trajectory([[0.0, DEFAULT_START[0], DEFAULT_START[1]],
                               [rt, button[0], button[1]]],
                              start=DEFAULT_START, target=button)

        trials.append(TrialRecord(
            trial_id=f"ddt-{idx:04d}", task="ddt", condition=cond_of[idx],
            responded=True, rt=float(rt), choice=choice,
            amount_ss=a_ss, delay_ss=d_ss, amount_ll=a_ll, delay_ll=d_ll,
            is_control=is_control, trajectory=traj))
    return SessionLog(subject_id=subject_id, session="synthetic",
                      device="mouse", trials=trials,
                      created_at=SYNTHETIC_TIMESTAMP)


# --- cohort generation --------------------------------------------------------

_DIST_KEYS = {"normal", "uniform", "lognormal", "constant"}


def _draw(rng: np.random.Generator, spec_value):
    """Sample one value from a distribution spec.

    Accepts a bare number (constant) or {"normal"|"uniform"|"lognormal":
    [a, b]} with optional "min"/"max" clipping.
    """
    if isinstance(spec_value, (int, float)):
        return float(spec_value)
    if not isinstance(spec_value, dict):
        raise InvalidSpec(f"bad distribution spec {spec_value!r}")
    kind = next((k for k in spec_value if k in _DIST_KEYS), None)
    if kind is None:
        raise InvalidSpec(f"unknown distribution in {spec_value!r}")
    args = spec_value[kind]
    if kind == "constant":
        val = float(args)
    elif kind == "normal":
        val = rng.normal(args[0], args[1])
    elif kind == "uniform":
        val = rng.uniform(args[0], args[1])
    else:
        val = rng.lognormal(args[0], args[1])
    lo = spec_value.get("min")
    hi = spec_value.get("max")
    if lo is not None:
        val = max(val, lo)
    if hi is not None:
        val = min(val, hi)
    return float(val)


def draw_subject_params(rng: np.random.Generator,
                        distributions: Optional[Dict] = None) -> SubjectParams:
    """SubjectParams with listed fields drawn, the rest at defaults."""
    distributions = dict(distributions or {})
    distributions.pop("scale_scores", None)
    params = SubjectParams()
    overrides = {}
    for name, dist in distributions.items():
        if not hasattr(params, name):
            raise InvalidSpec(f"unknown SubjectParams field {name!r}")
        overrides[name] = _draw(rng, dist)
    return replace(params, **overrides)


def simulate_cohort(spec: CohortSpec, param_distributions: Optional[Dict] = None,
                    seed: Optional[int] = None, with_ddt: bool = True,
                    subject_prefix: str = "S"):
    """Independent subjects with params drawn per the given distributions.

    Returns (logs, ground_truth): one combined SST+DDT SessionLog per subject
    and a row of true parameters (plus any sampled scale scores) per subject.
    """
    spec.validate()
    master = spec.seed if seed is None else seed
    dists = dict(param_distributions or {})
    score_dists = dists.get("scale_scores") or {}

    logs: List[SessionLog] = []
    truth: List[Dict[str, float]] = []
    for i in range(spec.n_subjects):
        sid = f"{subject_prefix}{i:04d}"
        prng = subject_rng(master, i, _STREAM_PARAMS)
        params = draw_subject_params(prng, dists)
        scores = {name: round(_draw(prng, d), 6) for name, d in sorted(score_dists.items())}

        sst = simulate_sst_session(params, spec,
                                   [master, i, _STREAM_SST], subject_id=sid)
        trials = list(sst.trials)
        if with_ddt:
            ddt = simulate_ddt_session(params, spec,
                                       [master, i, _STREAM_DDT], subject_id=sid)
            trials += ddt.trials
        logs.append(SessionLog(subject_id=sid, session="synthetic",
                               device="mouse", trials=trials,
                               created_at=SYNTHETIC_TIMESTAMP,
                               scale_scores=scores))
        row: Dict[str, float] = {"subject_id": sid}
        for name in ("ssrt_true", "ssrt_sd", "k_true", "beta_true", "curvature",
                     "velocity_jitter", "lapse_rate", "motor_lag",
                     "go_rt_mu", "go_rt_sigma", "go_rt_tau", "move_fraction"):
            row[name] = getattr(params, name)
        row.update(scores)
        truth.append(row)
    return logs, truth
