"""Session-to-table analysis: per-trial feature rows, per-subject summary
rows, per-subject-per-condition slices, and discounting fits.

These are the row builders behind the CLI commands and the pipeline; they
keep subjects independent (grouping is by subject_id across sessions) and
order all outputs by subject then trial so runs are reproducible.
"""

from __future__ import annotations

from collections import OrderedDict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from impulsekit import discounting
from impulsekit.errors import ImpulsekitError, NoControlTrials
from impulsekit.metrics import POLICIES, SubjectSummary, TrialRecord, quality_filter, summarize_subject
from impulsekit.sessionlog import SessionLog
from impulsekit.trajectory import (
    max_velocity,
    stopping_distance_for_trial,
    trial_features,
)

METRIC_OPTION_DEFAULTS = {
    "omission_policy": "exclude",
    "quantile_rule": "nth",
    "commission_convention": "fig6",
    "policy": "study1",
    "accel_mode": "time_normalized",
}


def feature_rows(logs: Iterable[SessionLog],
                 accel_mode: str = "time_normalized"
                 ) -> Tuple[List[Dict], List[str]]:
    """One row per trial with the five motion features.

    Trials whose trajectories cannot support a feature (too few samples)
    get empty feature cells and a warning instead of aborting the run.
    """
    rows: List[Dict] = []
    warnings: List[str] = []
    for log in logs:
        for t in log.trials:
            row = {
                "subject_id": log.subject_id, "session": log.session,
                "trial_id": t.trial_id, "task": t.task, "condition": t.condition,
                "kind": t.kind, "coherence": t.coherence, "ssd_ms": t.ssd,
                "responded": t.responded, "rt_ms": t.rt, "correct": t.correct,
                "choice": t.choice,
            }
            try:
                f = trial_features(t, accel_mode)
                row.update(total_distance=f.total_distance,
                           max_velocity=f.max_velocity,
                           max_acceleration=f.max_acceleration,
                           auc=f.auc, stopping_distance=f.stopping_distance,
                           auc_chord_fallback=f.auc_chord_fallback)
            except ImpulsekitError as e:
                warnings.append(f"{log.subject_id}/{t.trial_id}: {e}")
            rows.append(row)
    return rows, warnings


def group_by_subject(logs: Iterable[SessionLog]
                     ) -> "OrderedDict[str, Tuple[List[TrialRecord], Dict[str, float]]]":
    """Merge sessions per subject (trials concatenated, scale scores merged),
    ordered by subject_id."""
    grouped: Dict[str, Tuple[List[TrialRecord], Dict[str, float]]] = {}
    for log in logs:
        trials, scores = grouped.setdefault(log.subject_id, ([], {}))
        trials.extend(log.trials)
        scores.update(log.scale_scores)
    return OrderedDict((k, grouped[k]) for k in sorted(grouped))


def _fit_summary(trials, variant):
    choices = discounting.choice_trials_from_records(trials)
    fit = None
    consistency = None
    if any(not c.is_control for c in choices):
        fit = discounting.fit_discounting(choices, variant)
    try:
        consistency = discounting.control_consistency(choices)
    except NoControlTrials:
        pass
    return fit, consistency


def subject_rows(logs: Iterable[SessionLog],
                 options: Optional[Dict] = None,
                 fit_variant: Optional[str] = None
                 ) -> Tuple[List[Dict], List[SubjectSummary]]:
    """Per-subject metric rows plus the SubjectSummary objects behind them."""
    opts = dict(METRIC_OPTION_DEFAULTS)
    opts.update(options or {})
    policy = POLICIES[opts["policy"]]
    rows: List[Dict] = []
    summaries: List[SubjectSummary] = []
    for sid, (trials, scores) in group_by_subject(logs).items():
        summary = summarize_subject(
            trials, sid,
            omission_policy=opts["omission_policy"],
            quantile_rule=opts["quantile_rule"],
            commission_convention=opts["commission_convention"],
            accel_mode=opts["accel_mode"],
            scale_scores=scores)
        fit, consistency = _fit_summary(trials, fit_variant) \
            if fit_variant else (None, None)
        summary.discount_fit = fit
        try:
            verdict = quality_filter(summary, policy)
            accepted, reasons = verdict.accepted, ";".join(verdict.reasons)
        except ImpulsekitError:
            accepted, reasons = None, "missing_fields"
        row = {
            "subject_id": sid,
            "n_trials": len(trials),
            "n_go": sum(t.is_go() for t in trials),
            "n_stop": sum(t.is_stop() for t in trials),
            "stop_failure_rate": summary.stop_failure_rate,
            "commission_error": summary.commission_error_reported,
            "commission_convention": summary.commission_convention,
            "ssrt": summary.ssrt,
            "go_rt_mean": summary.go_rt_mean,
            "go_rt_sd": summary.go_rt_sd,
            "stop_rt_mean": summary.stop_rt_mean,
            "stop_rt_sd": summary.stop_rt_sd,
            "go_accuracy": summary.go_accuracy,
            "go_max_velocity_sd": summary.go_max_velocity_sd,
            "control_consistency": consistency,
            "accepted": accepted,
            "reject_reasons": reasons,
        }
        if fit is not None:
            row["k"] = fit.k
            row["beta"] = fit.beta
        for name in sorted(scores):
            row[name] = scores[name]
        rows.append(row)
        summaries.append(summary)
    return rows, summaries


def fit_rows(logs: Iterable[SessionLog], variant: str) -> List[Dict]:
    rows = []
    for sid, (trials, _) in group_by_subject(logs).items():
        fit, consistency = _fit_summary(trials, variant)
        if fit is None:
            continue
        rows.append({
            "subject_id": sid, "k": fit.k, "beta": fit.beta,
            "log_likelihood": fit.log_likelihood, "converged": fit.converged,
            "at_bound": fit.at_bound, "model_variant": fit.model_variant,
            "method": fit.method, "n_trials": fit.n_trials,
            "control_consistency": consistency,
        })
    return rows


def _mean_or_none(vals) -> Optional[float]:
    vals = [v for v in vals if v is not None]
    return float(np.mean(vals)) if vals else None


def by_condition_rows(logs: Iterable[SessionLog],
                      accel_mode: str = "time_normalized") -> List[Dict]:
    """Per subject-by-condition slice: stop metrics and SST motion metrics
    within the condition, plus motion-feature means over responded trials
    of either task."""
    rows: List[Dict] = []
    for sid, (trials, _) in group_by_subject(logs).items():
        conditions = sorted({t.condition for t in trials})
        for cond in conditions:
            sub = [t for t in trials if t.condition == cond]
            gos = [t for t in sub if t.is_go()]
            stops = [t for t in sub if t.is_stop()]
            go_vels = [max_velocity(t.trajectory) for t in gos
                       if len(t.trajectory) >= 2]
            stop_dists = [stopping_distance_for_trial(t) for t in stops
                          if len(t.trajectory) >= 2]
            responded = [t for t in sub if t.responded and len(t.trajectory) >= 3]
            feats = [trial_features(t, accel_mode) for t in responded]
            rows.append({
                "subject_id": sid, "condition": cond,
                "n_go": len(gos), "n_stop": len(stops),
                "go_accuracy": (_mean_or_none([bool(t.correct) for t in gos])
                                if gos else None),
                "stop_failure_rate": (_mean_or_none([t.responded for t in stops])
                                      if stops else None),
                "go_max_velocity_sd": (float(np.std(go_vels, ddof=1))
                                       if len(go_vels) >= 2 else None),
                "stopping_distance_mean": _mean_or_none(stop_dists),
                "max_velocity_mean": _mean_or_none([f.max_velocity for f in feats]),
                "auc_mean": _mean_or_none([f.auc for f in feats]),
                "total_distance_mean": _mean_or_none([f.total_distance for f in feats]),
            })
    return rows
