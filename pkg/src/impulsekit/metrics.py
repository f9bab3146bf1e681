"""Per-subject stop-signal and go-trial metrics.

SSRT uses the integration method: the p-quantile of the go-RT distribution
(p = stop-failure rate) minus the mean stop-signal delay. Everything here is
a pure function of the trial list, so subjects can be processed in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from impulsekit.errors import (
    DegenerateStopRate,
    MissingField,
    NoGoRTs,
    NoGoTrials,
    NoStopTrials,
    TooFewTrials,
)
from impulsekit.trajectory import FeatureVector, Trajectory, max_velocity

RESPONSE_WINDOW_MS = 3000.0
SSD_SET = (100, 200, 300, 400, 500, 600)
COHERENCE_SET = (10, 50, 80)

OMISSION_POLICIES = ("exclude", "assign_max")
QUANTILE_RULES = ("nth", "interp")
COMMISSION_CONVENTIONS = ("fig5", "fig6")


@dataclass
class TrialRecord:
    """One trial as parsed from a session log.

    kind/coherence/ssd apply to SST trials; choice and the offer fields
    (amount_ss .. is_control) apply to DDT trials.
    """

    trial_id: str
    task: str                      # "sst" | "ddt"
    condition: str                 # "pleasant" | "unpleasant" | "neutral"
    responded: bool
    trajectory: Trajectory
    kind: Optional[str] = None     # "go" | "stop"
    coherence: Optional[int] = None
    ssd: Optional[float] = None    # ms, stop trials only
    rt: Optional[float] = None     # ms, present iff responded
    correct: Optional[bool] = None
    choice: Optional[str] = None   # "sooner_smaller" | "larger_later"
    amount_ss: Optional[float] = None
    delay_ss: Optional[float] = None   # days
    amount_ll: Optional[float] = None
    delay_ll: Optional[float] = None   # days
    is_control: Optional[bool] = None
    valence: Optional[float] = None
    arousal: Optional[float] = None
    slider_touched: Optional[bool] = None
    extra: Dict[str, object] = field(default_factory=dict)

    def is_go(self) -> bool:
        return self.task == "sst" and self.kind == "go"

    def is_stop(self) -> bool:
        return self.task == "sst" and self.kind == "stop"


@dataclass
class ConditionBreakdown:
    """Per-condition slice of the accuracy/commission numbers."""

    go_accuracy: Optional[float] = None
    stop_failure_rate: Optional[float] = None


@dataclass
class SubjectSummary:
    subject_id: str
    stop_failure_rate: Optional[float] = None
    commission_error_reported: Optional[float] = None
    commission_convention: str = "fig6"
    ssrt: Optional[float] = None
    go_rt_mean: Optional[float] = None
    go_rt_sd: Optional[float] = None
    stop_rt_mean: Optional[float] = None
    stop_rt_sd: Optional[float] = None
    go_max_velocity_sd: Optional[float] = None
    go_accuracy: Optional[float] = None
    discount_fit: Optional[object] = None
    scale_scores: Dict[str, float] = field(default_factory=dict)
    per_condition: Dict[str, ConditionBreakdown] = field(default_factory=dict)


def stop_failure_rate(trials: Sequence[TrialRecord]) -> float:
    """Fraction of stop trials with a response."""
    stops = [t for t in trials if t.is_stop()]
    if not stops:
        raise NoStopTrials("no stop trials")
    return sum(t.responded for t in stops) / len(stops)


def commission_error(rate: float, convention: str = "fig6") -> float:
    """Reported commission-error column under either labeling convention.

    fig6 (default): proportion of responding on stop trials (higher = more
    impulsive); fig5: its complement. The two columns sum to 1.
    """
    if convention not in COMMISSION_CONVENTIONS:
        raise ValueError(f"convention must be one of {COMMISSION_CONVENTIONS}")
    return rate if convention == "fig6" else 1.0 - rate


def go_rts_from_trials(trials: Sequence[TrialRecord]) -> List[Optional[float]]:
    """Go-trial RTs with None marking omissions, in trial order."""
    return [t.rt if t.responded else None for t in trials if t.is_go()]


def ssrt_integration(go_rts: Sequence[Optional[float]],
                     stop_trials: Sequence[TrialRecord],
                     omission_policy: str = "exclude",
                     quantile_rule: str = "nth",
                     cap_ms: float = RESPONSE_WINDOW_MS) -> float:
    """SSRT by the integration method.

    Q is the p-quantile of the policy-adjusted go-RT distribution, where p is
    the stop-failure rate; SSRT = Q - mean(SSD over all stop trials). The
    default quantile rule takes the ceil(p*N)-th sorted RT; "interp" uses the
    linearly interpolated quantile. Omissions (None entries) are dropped under
    "exclude" or replaced by the response cap under "assign_max".
    """
    if omission_policy not in OMISSION_POLICIES:
        raise ValueError(f"omission_policy must be one of {OMISSION_POLICIES}")
    if quantile_rule not in QUANTILE_RULES:
        raise ValueError(f"quantile_rule must be one of {QUANTILE_RULES}")

    p = stop_failure_rate(stop_trials)
    if p <= 0.0 or p >= 1.0:
        raise DegenerateStopRate(f"stop-failure rate {p:g} leaves SSRT undefined")

    if omission_policy == "exclude":
        rts = np.array([r for r in go_rts if r is not None], dtype=np.float64)
    else:
        rts = np.array([cap_ms if r is None else r for r in go_rts], dtype=np.float64)
    if rts.size == 0:
        raise NoGoRTs("no usable go RTs")

    rts.sort()
    if quantile_rule == "nth":
        n = math.ceil(p * rts.size)
        q = rts[max(n, 1) - 1]
    else:
        q = np.quantile(rts, p, method="linear")

    ssds = [float(t.ssd) for t in stop_trials if t.is_stop()]
    return float(q - np.mean(ssds))


def _sample_sd(values: np.ndarray) -> Optional[float]:
    if values.size < 2:
        return None
    return float(np.std(values, ddof=1))


def go_stats(trials: Sequence[TrialRecord]) -> Dict[str, Optional[float]]:
    """RT and accuracy summaries; stop RTs use failed stops only."""
    gos = [t for t in trials if t.is_go()]
    if not gos:
        raise NoGoTrials("no go trials")
    go_rt = np.array([t.rt for t in gos if t.responded and t.rt is not None])
    failed = [t for t in trials if t.is_stop() and t.responded and t.rt is not None]
    stop_rt = np.array([t.rt for t in failed])
    return {
        "go_rt_mean": float(np.mean(go_rt)) if go_rt.size else None,
        "go_rt_sd": _sample_sd(go_rt),
        "stop_rt_mean": float(np.mean(stop_rt)) if stop_rt.size else None,
        "stop_rt_sd": _sample_sd(stop_rt),
        "go_accuracy": sum(bool(t.correct) for t in gos) / len(gos),
    }


def go_max_velocity_sd(features: Sequence[FeatureVector]) -> float:
    """Sample SD of per-trial peak velocity; the attentional-variability metric."""
    if len(features) < 2:
        raise TooFewTrials("need >= 2 go-trial feature vectors")
    return float(np.std([f.max_velocity for f in features], ddof=1))


# --- data-quality filtering --------------------------------------------------

@dataclass(frozen=True)
class QualityPolicy:
    """Inclusion thresholds; stop_success = 1 - stop_failure_rate.

    per_condition policies apply the thresholds inside every condition slice
    (a subject must pass everywhere), matching the two-session design.
    """

    name: str
    min_go_accuracy: float
    min_stop_success: float
    per_condition: bool = False


POLICIES = {
    "study1": QualityPolicy("study1", 0.05, 0.05, per_condition=False),
    "study2": QualityPolicy("study2", 0.05, 0.05, per_condition=True),
    "strict20": QualityPolicy("strict20", 0.20, 0.20, per_condition=False),
    "strict40": QualityPolicy("strict40", 0.40, 0.40, per_condition=False),
}


@dataclass(frozen=True)
class FilterVerdict:
    accepted: bool
    reasons: tuple = ()


def _check_slice(acc, sfr, policy, suffix=""):
    reasons = []
    if acc is None or sfr is None:
        raise MissingField(f"policy {policy.name} needs go_accuracy and "
                           f"stop_failure_rate{suffix or ''}")
    if acc < policy.min_go_accuracy:
        reasons.append("primary_accuracy" + suffix)
    if (1.0 - sfr) < policy.min_stop_success:
        reasons.append("commission" + suffix)
    return reasons


def quality_filter(summary: SubjectSummary, policy: QualityPolicy) -> FilterVerdict:
    """Deterministic accept/reject with machine-readable reasons."""
    reasons: List[str] = []
    if policy.per_condition and summary.per_condition:
        for cond in sorted(summary.per_condition):
            b = summary.per_condition[cond]
            reasons += _check_slice(b.go_accuracy, b.stop_failure_rate, policy,
                                    f":{cond}")
    else:
        reasons += _check_slice(summary.go_accuracy, summary.stop_failure_rate,
                                policy)
    return FilterVerdict(accepted=not reasons, reasons=tuple(reasons))


# --- one-call subject summary ---------------------------------------------------

def summarize_subject(trials: Sequence[TrialRecord],
                      subject_id: str,
                      omission_policy: str = "exclude",
                      quantile_rule: str = "nth",
                      commission_convention: str = "fig6",
                      accel_mode: str = "time_normalized",
                      fit_variant: Optional[str] = None,
                      scale_scores: Optional[Dict[str, float]] = None) -> SubjectSummary:
    """Aggregate one subject's trials into a SubjectSummary.

    SST metrics need at least one go trial; the SSRT is left undefined (None)
    when the stop-failure rate is degenerate, never coerced to a number.
    Passing fit_variant also fits the discounting model to the DDT trials.
    """
    summary = SubjectSummary(subject_id=subject_id,
                             commission_convention=commission_convention,
                             scale_scores=dict(scale_scores or {}))
    sst = [t for t in trials if t.task == "sst"]
    if any(t.is_go() for t in sst):
        stats = go_stats(sst)
        summary.go_rt_mean = stats["go_rt_mean"]
        summary.go_rt_sd = stats["go_rt_sd"]
        summary.stop_rt_mean = stats["stop_rt_mean"]
        summary.stop_rt_sd = stats["stop_rt_sd"]
        summary.go_accuracy = stats["go_accuracy"]
        vels = [max_velocity(t.trajectory) for t in sst
                if t.is_go() and len(t.trajectory) >= 2]
        if len(vels) >= 2:
            summary.go_max_velocity_sd = float(np.std(vels, ddof=1))
    if any(t.is_stop() for t in sst):
        rate = stop_failure_rate(sst)
        summary.stop_failure_rate = rate
        summary.commission_error_reported = commission_error(rate, commission_convention)
        try:
            summary.ssrt = ssrt_integration(go_rts_from_trials(sst),
                                            [t for t in sst if t.is_stop()],
                                            omission_policy, quantile_rule)
        except (DegenerateStopRate, NoGoRTs):
            summary.ssrt = None

    for cond in sorted({t.condition for t in sst}):
        sub = [t for t in sst if t.condition == cond]
        b = ConditionBreakdown()
        if any(t.is_go() for t in sub):
            b.go_accuracy = go_stats(sub)["go_accuracy"]
        if any(t.is_stop() for t in sub):
            b.stop_failure_rate = stop_failure_rate(sub)
        summary.per_condition[cond] = b

    if fit_variant is not None:
        from impulsekit import discounting
        choices = discounting.choice_trials_from_records(trials)
        if choices:
            summary.discount_fit = discounting.fit_discounting(choices, fit_variant)
    return summary
