"""End-to-end pipeline: simulate (or ingest) -> features -> metrics ->
transform -> stats -> one StatReport.

The report embeds every resolved option and the digests of everything it
consumed; with a fixed seed the whole run is byte-identical across
invocations. Input keys are logical names (not absolute paths) so reports
from different working directories still compare equal.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from impulsekit import analyze, report, tables
from impulsekit.errors import InvalidSpec
from impulsekit.sessionlog import iter_sessions, write_sessions_jsonl
from impulsekit.simulate import CohortSpec, simulate_cohort
from impulsekit.stats import (
    ConditionMatrix,
    parallel_moderation,
    rank_inverse_normal,
    rm_anova_two_factor,
    within_subject_contrast,
    within_subject_sem,
)

DEMO_CONFIG: Dict = {
    "seed": 20260811,
    "cohort": {
        "n_subjects": 24,
        "trials_per_task": 120,
        "stop_fraction": 0.25,
        "condition_schedule": ["unpleasant", "neutral", "pleasant"],
    },
    "params": {
        "ssrt_true": {"normal": [250.0, 30.0], "min": 120.0},
        "ssrt_sd": 20.0,
        "k_true": {"lognormal": [-4.2, 0.9], "min": 1e-4, "max": 0.5},
        "beta_true": {"lognormal": [1.1, 0.4]},
        "curvature": {"normal": [0.12, 0.04], "min": 0.0},
        "velocity_jitter": {"normal": [0.12, 0.03], "min": 0.02},
        "lapse_rate": {"uniform": [0.0, 0.05]},
        "scale_scores": {
            "UPPS_NU": {"normal": [2.3, 0.5], "min": 1.0, "max": 4.0},
            "UPPS_PU": {"normal": [2.1, 0.5], "min": 1.0, "max": 4.0},
        },
    },
    "metrics": {
        "omission_policy": "exclude",
        "quantile_rule": "nth",
        "commission_convention": "fig6",
        "policy": "study1",
        "accel_mode": "time_normalized",
    },
    "fit": {"variant": "softmax_hyperbolic"},
    "transform": {
        "subjects": ["go_max_velocity_sd", "k"],
        "by_condition": ["stopping_distance_mean", "go_max_velocity_sd",
                         "stop_failure_rate"],
    },
    "contrast": {
        "measure": "stopping_distance_mean_int",
        "weights": [2.0, -1.0, -1.0],
        "order": ["unpleasant", "neutral", "pleasant"],
    },
    "anova": {"measure": "max_velocity_mean",
              "factor_a": "task", "factor_b": "condition"},
    "moderation": {"y": "k_int", "x": "go_max_velocity_sd_int",
                   "m1": "UPPS_NU", "m2": "UPPS_PU"},
}


def _int_transform_rows(rows: List[Dict], columns: List[str]):
    """Append <col>_int columns, each transformed over the pooled non-missing
    rows (rank ties averaged)."""
    for col in columns:
        present = [i for i, r in enumerate(rows)
                   if r.get(col) is not None and r.get(col) != ""]
        values = [float(rows[i][col]) for i in present]
        if len(values) >= 2:
            scores = rank_inverse_normal(values)
        else:
            scores = [None] * len(values)
        for i in range(len(rows)):
            rows[i][col + "_int"] = None
        for i, s in zip(present, scores):
            rows[i][col + "_int"] = None if s is None else float(s)


def _condition_matrix(rows: List[Dict], measure: str, order: List[str]
                      ) -> ConditionMatrix:
    cells: Dict[str, Dict[str, float]] = {}
    for r in rows:
        if r.get(measure) is None:
            continue
        cells.setdefault(r["subject_id"], {})[r["condition"]] = float(r[measure])
    subjects = sorted(sid for sid, per in cells.items()
                      if all(c in per for c in order))
    if len(subjects) < 2:
        raise InvalidSpec(f"fewer than 2 subjects have {measure!r} in all of {order}")
    values = np.array([[cells[s][c] for c in order] for s in subjects])
    return ConditionMatrix(subjects=subjects, conditions=list(order), values=values)


def _anova_cube(feature_rows: List[Dict], measure_src: str,
                factor_a: str, factor_b: str):
    """subject x A x B cell means from by-condition/task feature aggregation."""
    cells: Dict[str, Dict[tuple, List[float]]] = {}
    for r in feature_rows:
        val = r.get(measure_src)
        if val is None or not r.get("responded"):
            continue
        key = (str(r[factor_a]), str(r[factor_b]))
        cells.setdefault(r["subject_id"], {}).setdefault(key, []).append(float(val))
    a_levels = sorted({k[0] for per in cells.values() for k in per})
    b_levels = sorted({k[1] for per in cells.values() for k in per})
    subjects = sorted(sid for sid, per in cells.items()
                      if all((a, b) in per for a in a_levels for b in b_levels))
    if len(subjects) < 2 or len(a_levels) < 2 or len(b_levels) < 2:
        raise InvalidSpec("anova needs >= 2 subjects with complete cells and "
                          ">= 2 levels per factor")
    cube = np.array([[[float(np.mean(cells[s][(a, b)])) for b in b_levels]
                      for a in a_levels] for s in subjects])
    return cube, subjects, a_levels, b_levels


def _moderation_block(subj_rows: List[Dict], cfg: Dict) -> Dict:
    y_col, x_col = cfg["y"], cfg["x"]
    m1_col, m2_col = cfg["m1"], cfg["m2"]
    center = bool(cfg.get("center", True))
    rows = [r for r in subj_rows
            if all(r.get(c) is not None and r.get(c) != ""
                   for c in (y_col, x_col, m1_col, m2_col))]
    res = parallel_moderation([float(r[y_col]) for r in rows],
                              [float(r[x_col]) for r in rows],
                              [float(r[m1_col]) for r in rows],
                              [float(r[m2_col]) for r in rows],
                              center=center)
    out = report.pin_floats(res)
    out.update(y=y_col, x=x_col, m1=m1_col, m2=m2_col, n=len(rows))
    return out


def run_pipeline(config: Dict, out_dir) -> Dict:
    """Execute the configured pipeline; returns the StatReport dict after
    writing report.json/report.txt and all intermediate tables to out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = json.loads(json.dumps(config))  # defensive copy, JSON-clean
    inputs: Dict[str, str] = {"config": report.text_digest(report.canonical_json(cfg))}
    results: Dict = {}

    # --- sessions: simulate or ingest ---
    truth = None
    if "sessions" in cfg:
        logs = []
        for path in cfg["sessions"]:
            logs.extend(iter_sessions(path))
            inputs[Path(path).name] = report.file_digest(path)
    else:
        spec = CohortSpec(seed=int(cfg.get("seed", 0)), **cfg.get("cohort", {}))
        logs, truth = simulate_cohort(spec, cfg.get("params", {}))
        write_sessions_jsonl(out / "sessions.jsonl", logs)
        inputs["sessions.jsonl"] = report.file_digest(out / "sessions.jsonl")
        if truth:
            cols = list(truth[0].keys())
            tables.write_csv(out / "ground_truth.csv", cols, truth)
    results["cohort"] = {
        "n_sessions": len(logs),
        "n_subjects": len({log.subject_id for log in logs}),
        "n_trials": sum(len(log.trials) for log in logs),
    }

    # --- per-trial features ---
    accel_mode = cfg.get("metrics", {}).get("accel_mode", "time_normalized")
    feat_rows, feat_warnings = analyze.feature_rows(logs, accel_mode)
    tables.write_csv(out / "features.csv", tables.FEATURE_COLUMNS, feat_rows)
    results["features"] = {
        "n_rows": len(feat_rows),
        "n_skipped": len(feat_warnings),
        "n_auc_fallback": sum(bool(r.get("auc_chord_fallback")) for r in feat_rows),
    }

    # --- per-subject metrics and fits ---
    fit_variant = cfg.get("fit", {}).get("variant", "softmax_hyperbolic")
    subj_rows, _ = analyze.subject_rows(logs, cfg.get("metrics"), fit_variant)
    cond_rows = analyze.by_condition_rows(logs, accel_mode)

    # --- rank-based inverse normal transforms (pooled per column) ---
    tr_cfg = cfg.get("transform", {})
    subj_int = list(tr_cfg.get("subjects", []))
    cond_int = list(tr_cfg.get("by_condition", []))
    _int_transform_rows(subj_rows, subj_int)
    _int_transform_rows(cond_rows, cond_int)

    scale_names = sorted({k for r in subj_rows for k in r
                          if k not in tables.SUBJECT_COLUMNS})
    tables.write_csv(out / "subjects.csv",
                     tables.SUBJECT_COLUMNS + scale_names, subj_rows)
    cond_cols = tables.BY_CONDITION_COLUMNS + [c + "_int" for c in cond_int]
    tables.write_csv(out / "subjects_by_condition.csv", cond_cols, cond_rows)
    results["subjects"] = [report.pin_floats(r) for r in subj_rows]

    # --- statistics blocks ---
    if "contrast" in cfg:
        ccfg = cfg["contrast"]
        order = list(ccfg.get("order", ["unpleasant", "neutral", "pleasant"]))
        matrix = _condition_matrix(cond_rows, ccfg["measure"], order)
        res = within_subject_contrast(matrix, [float(w) for w in ccfg["weights"]])
        block = report.pin_floats(res)
        block.update(measure=ccfg["measure"], condition_order=order,
                     n_subjects=len(matrix.subjects))
        results["contrast"] = block
        sem = within_subject_sem(matrix)
        results["within_subject_sem"] = {
            "measure": ccfg["measure"], "conditions": order,
            "sem": report.pin_floats(sem),
            "normalization": "cousineau_morey",
        }

    if "anova" in cfg:
        acfg = cfg["anova"]
        fa, fb = acfg.get("factor_a", "task"), acfg.get("factor_b", "condition")
        src = acfg.get("measure", "max_velocity_mean")
        src_col = {"max_velocity_mean": "max_velocity"}.get(src, src)
        cube, subjects, a_levels, b_levels = _anova_cube(feat_rows, src_col, fa, fb)
        table = rm_anova_two_factor(cube)
        results["anova"] = {
            "measure": src, "factor_a": fa, "factor_b": fb,
            "a_levels": a_levels, "b_levels": b_levels,
            "n_subjects": len(subjects),
            "effects": {name: report.pin_floats(eff)
                        for name, eff in table.effects.items()},
            "ss_total": report.pin_floats(table.ss_total),
            "effect_size_note": table.effect_size_note,
        }

    if "moderation" in cfg:
        results["moderation"] = _moderation_block(subj_rows, cfg["moderation"])

    # --- ground-truth recovery, when this run simulated its own cohort ---
    if truth:
        true_by_sid = {row["subject_id"]: row for row in truth}
        pairs = [(true_by_sid[r["subject_id"]]["ssrt_true"], r["ssrt"])
                 for r in subj_rows if r.get("ssrt") is not None]
        rec: Dict[str, float] = {}
        if len(pairs) >= 3:
            tr, es = zip(*pairs)
            rec["ssrt_mean_error"] = float(np.mean(np.array(es) - np.array(tr)))
            if np.std(tr) > 0:
                rec["ssrt_regression_slope"] = float(np.polyfit(tr, es, 1)[0])
        kpairs = [(true_by_sid[r["subject_id"]]["k_true"], r.get("k"))
                  for r in subj_rows if r.get("k") is not None]
        if kpairs:
            rec["k_median_abs_log10_error"] = float(np.median(
                [abs(np.log10(e) - np.log10(t)) for t, e in kpairs]))
        results["recovery"] = rec

    stat_report = report.build_report(
        options={k: cfg[k] for k in sorted(cfg) if k != "sessions"},
        inputs=inputs, results=results)
    report.write_report(stat_report, out / "report.json", out / "report.txt")
    return stat_report
