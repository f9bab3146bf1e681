"""Command-line interface.

Exit codes: 0 success, 1 validation/analysis failure, 2 usage error.
Every table-producing command writes a `<output>.meta.json` sidecar with the
resolved options and input digests; report-producing commands embed them.
Outputs are written atomically (temp file + rename), so a failed run never
leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List

from impulsekit import __version__, analyze, pipeline, report, tables
from impulsekit.errors import ImpulsekitError, SchemaError
from impulsekit.sessionlog import iter_sessions
from impulsekit.simulate import CohortSpec, simulate_cohort
from impulsekit.stats import (
    CONTRAST_PRESETS,
    PRESET_CONDITION_ORDER,
    parallel_moderation,
    rank_inverse_normal,
    rm_anova_two_factor,
    within_subject_contrast,
    within_subject_sem,
)


def _fail(message: str, code: int = 1):
    print(json.dumps({"error": message}), file=sys.stderr)
    raise SystemExit(code)


def _load_sessions(paths: List[str], strict: bool = False):
    logs, inputs = [], {}
    for path in paths:
        try:
            logs.extend(iter_sessions(path, strict=strict))
        except FileNotFoundError:
            _fail(f"no such file: {path}")
        except SchemaError as e:
            _fail(str(e))
        inputs[Path(path).name] = report.file_digest(path)
    if not logs:
        _fail("no sessions found in inputs")
    return logs, inputs


def _emit_report(payload: Dict, out: str | None):
    text = report.canonical_json(payload)
    if out:
        report.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


# --- subcommand implementations ----------------------------------------------

def cmd_features(args):
    logs, inputs = _load_sessions(args.sessions, args.strict)
    rows, warnings = analyze.feature_rows(logs, args.accel_mode)
    tables.write_csv(args.output, tables.FEATURE_COLUMNS, rows)
    report.write_meta(args.output, {"accel_mode": args.accel_mode,
                                    "strict": args.strict}, inputs)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"features: {len(rows)} rows -> {args.output}")


def cmd_metrics(args):
    logs, inputs = _load_sessions(args.sessions, args.strict)
    options = {
        "omission_policy": args.omission.replace("-", "_"),
        "quantile_rule": args.quantile,
        "commission_convention": args.commission,
        "policy": args.policy,
        "accel_mode": args.accel_mode,
    }
    rows, _ = analyze.subject_rows(logs, options,
                                   fit_variant=args.variant if args.fit else None)
    scale_names = sorted({k for r in rows for k in r
                          if k not in tables.SUBJECT_COLUMNS})
    tables.write_csv(args.output, tables.SUBJECT_COLUMNS + scale_names, rows)
    report.write_meta(args.output, options, inputs)
    if args.by_condition:
        cond_rows = analyze.by_condition_rows(logs, args.accel_mode)
        tables.write_csv(args.by_condition, tables.BY_CONDITION_COLUMNS, cond_rows)
        report.write_meta(args.by_condition, options, inputs)
    print(f"metrics: {len(rows)} subjects -> {args.output}")


def cmd_fit_dd(args):
    logs, inputs = _load_sessions(args.sessions, args.strict)
    rows = analyze.fit_rows(logs, args.variant)
    tables.write_csv(args.output, tables.FIT_COLUMNS, rows)
    report.write_meta(args.output, {"variant": args.variant}, inputs)
    print(f"fit-dd: {len(rows)} subjects -> {args.output}")


def cmd_transform(args):
    rows = tables.read_csv(args.input)
    if not rows:
        _fail(f"{args.input}: empty table")
    for col in args.column:
        if col not in rows[0]:
            _fail(f"{args.input}: no column {col!r}")
    groups: Dict[str, List[int]] = {}
    if args.pool == "all":
        groups["all"] = list(range(len(rows)))
    else:
        if args.pool not in rows[0]:
            _fail(f"{args.input}: no pooling column {args.pool!r}")
        for i, r in enumerate(rows):
            groups.setdefault(r[args.pool], []).append(i)
    for col in args.column:
        out_col = col + "_int"
        for r in rows:
            r[out_col] = ""
        for members in groups.values():
            present = [i for i in members if rows[i].get(col, "") != ""]
            if len(present) < 2:
                continue
            scores = rank_inverse_normal([float(rows[i][col]) for i in present])
            for i, s in zip(present, scores):
                rows[i][out_col] = repr(float(s))
    columns = list(rows[0].keys())
    tables.write_csv(args.output, columns, rows)
    report.write_meta(args.output,
                      {"columns": args.column, "pool": args.pool,
                       "rank_offset": "blom_3_8", "ties": "average"},
                      {Path(args.input).name: report.file_digest(args.input)})
    print(f"transform: {len(rows)} rows -> {args.output}")


def _contrast_matrix(rows, subject_col, by_col, value_col, order):
    cells: Dict[str, Dict[str, List[float]]] = {}
    for r in rows:
        if r.get(value_col, "") == "":
            continue
        cells.setdefault(r[subject_col], {}).setdefault(
            r[by_col], []).append(float(r[value_col]))
    labels = sorted({c for per in cells.values() for c in per})
    if order is None:
        order = [c for c in PRESET_CONDITION_ORDER if c in labels] \
            if set(labels) <= set(PRESET_CONDITION_ORDER) else labels
    subjects = sorted(s for s, per in cells.items() if all(c in per for c in order))
    if len(subjects) < 2:
        _fail(f"fewer than 2 subjects complete across conditions {order}")
    import numpy as np
    from impulsekit.stats import ConditionMatrix
    values = np.array([[float(np.mean(cells[s][c])) for c in order]
                       for s in subjects])
    return ConditionMatrix(subjects, list(order), values), order


def cmd_contrast(args):
    rows = tables.read_csv(args.input)
    if args.preset:
        weights = list(CONTRAST_PRESETS[args.preset])
    elif args.weights:
        weights = [float(w) for w in args.weights.split(",")]
    else:
        _fail("contrast needs --weights or --preset", code=2)
    order = args.order.split(",") if args.order else None
    matrix, order = _contrast_matrix(rows, args.subject, args.by, args.value, order)
    try:
        res = within_subject_contrast(matrix, weights)
    except ImpulsekitError as e:
        _fail(str(e))
    sem = within_subject_sem(matrix)
    options = {"weights": weights, "by": args.by, "value": args.value,
               "order": order, "preset": args.preset,
               "error_term": "subject_by_condition_interaction"}
    payload = report.build_report(
        options, {Path(args.input).name: report.file_digest(args.input)},
        {"contrast": {**report.pin_floats(res), "measure": args.value,
                      "condition_order": order, "n_subjects": len(matrix.subjects)},
         "within_subject_sem": {"measure": args.value, "conditions": order,
                                "sem": report.pin_floats(sem)}})
    _emit_report(payload, args.output)


def cmd_anova(args):
    rows = tables.read_csv(args.input)
    fa, fb = [f.strip() for f in args.factors.split(",")]
    recs = []
    for r in rows:
        val = r.get(args.value, "")
        recs.append({"subject_id": r.get(args.subject), fa: r.get(fa),
                     fb: r.get(fb), "responded": True,
                     args.value: float(val) if val != "" else None})
    cube, subjects, a_levels, b_levels = pipeline._anova_cube(
        recs, args.value, fa, fb)
    table = rm_anova_two_factor(cube)
    options = {"factors": [fa, fb], "value": args.value}
    payload = report.build_report(
        options, {Path(args.input).name: report.file_digest(args.input)},
        {"anova": {"measure": args.value, "factor_a": fa, "factor_b": fb,
                   "a_levels": a_levels, "b_levels": b_levels,
                   "n_subjects": len(subjects),
                   "effects": {k: report.pin_floats(v)
                               for k, v in table.effects.items()},
                   "ss_total": report.pin_floats(table.ss_total),
                   "effect_size_note": table.effect_size_note}})
    _emit_report(payload, args.output)


def cmd_moderate(args):
    rows = tables.read_csv(args.input)
    cfg = {"y": args.y, "x": args.x, "m1": args.m1, "m2": args.m2,
           "center": not args.no_center}
    try:
        block = pipeline._moderation_block(rows, cfg)
    except (ImpulsekitError, ValueError) as e:
        _fail(str(e))
    payload = report.build_report(
        cfg, {Path(args.input).name: report.file_digest(args.input)},
        {"moderation": block})
    _emit_report(payload, args.output)


def cmd_simulate(args):
    with open(args.spec, "r", encoding="utf-8") as fh:
        spec_cfg = json.load(fh)
    params = spec_cfg.pop("params", {})
    if args.seed is not None:
        spec_cfg["seed"] = args.seed
    try:
        spec = CohortSpec(**{k: tuple(v) if isinstance(v, list) else v
                             for k, v in spec_cfg.items()})
        spec.validate()
        logs, truth = simulate_cohort(spec, params)
    except (ImpulsekitError, TypeError) as e:
        _fail(f"bad simulation spec: {e}")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    from impulsekit.sessionlog import write_sessions_jsonl
    write_sessions_jsonl(out / "sessions.jsonl", logs)
    if truth:
        tables.write_csv(out / "ground_truth.csv", list(truth[0].keys()), truth)
    report.write_meta(out / "sessions.jsonl",
                      {"spec": spec_cfg, "params": params,
                       "seed": spec.seed},
                      {Path(args.spec).name: report.file_digest(args.spec)})
    print(f"simulate: {len(logs)} sessions -> {out / 'sessions.jsonl'}")


def cmd_pipeline(args):
    if args.demo:
        cfg = json.loads(json.dumps(pipeline.DEMO_CONFIG))
    else:
        if not args.config:
            _fail("pipeline needs --config or --demo", code=2)
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        pipeline.run_pipeline(cfg, args.output)
    except ImpulsekitError as e:
        _fail(str(e))
    print(f"pipeline: report -> {Path(args.output) / 'report.json'}")


def cmd_collect(args):
    from impulsekit import server
    server.serve_forever(args.port, args.out, args.assets,
                         strict=args.strict, host=args.host)


def cmd_validate(args):
    failures = 0
    for path in args.sessions:
        try:
            n_sessions = 0
            n_warn = 0
            for log in iter_sessions(path, strict=args.strict):
                n_sessions += 1
                n_warn += len(log.warnings)
                if args.verbose:
                    for w in log.warnings:
                        print(f"{path}: {log.subject_id}: warning: {w}")
            print(f"{path}: OK ({n_sessions} sessions, {n_warn} warnings)")
        except FileNotFoundError:
            print(f"{path}: ERROR: no such file", file=sys.stderr)
            failures += 1
        except SchemaError as e:
            print(f"{path}: ERROR: {e}", file=sys.stderr)
            failures += 1
    if failures:
        raise SystemExit(1)


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="impulsekit",
        description="Mouse-cursor impulsivity toolkit: features, SSRT, "
                    "discounting fits, statistics, simulation, collection.")
    p.add_argument("--version", action="version", version=f"impulsekit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add_sessions(sp):
        sp.add_argument("sessions", nargs="+", help="session .json/.jsonl files")
        sp.add_argument("--strict", action="store_true",
                        help="treat protocol-range warnings as errors")

    sp = sub.add_parser("features", help="per-trial motion features -> CSV")
    add_sessions(sp)
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--accel-mode", choices=["time_normalized", "raw_difference"],
                    default="time_normalized")
    sp.set_defaults(func=cmd_features)

    sp = sub.add_parser("metrics", help="per-subject summaries -> CSV")
    add_sessions(sp)
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--omission", choices=["exclude", "assign-max"], default="exclude")
    sp.add_argument("--quantile", choices=["nth", "interp"], default="nth")
    sp.add_argument("--commission", choices=["fig5", "fig6"], default="fig6")
    sp.add_argument("--policy", choices=["study1", "study2", "strict20", "strict40"],
                    default="study1")
    sp.add_argument("--accel-mode", choices=["time_normalized", "raw_difference"],
                    default="time_normalized")
    sp.add_argument("--fit", action="store_true",
                    help="also fit the discounting model per subject")
    sp.add_argument("--variant", choices=["softmax", "literal"], default="softmax")
    sp.add_argument("--by-condition", metavar="CSV",
                    help="also write per-subject-per-condition rows here")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("fit-dd", help="delay-discounting fits -> CSV")
    add_sessions(sp)
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--variant", choices=["softmax", "literal"], default="softmax")
    sp.set_defaults(func=cmd_fit_dd)

    sp = sub.add_parser("transform",
                        help="rank-based inverse normal transform of CSV columns")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--column", action="append", required=True,
                    help="column to transform (repeatable)")
    sp.add_argument("--pool", default="all",
                    help="'all' pools every row; a column name pools within "
                         "each of its groups")
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("contrast", help="within-subject contrast analysis")
    sp.add_argument("-i", "--input", required=True, help="long-format CSV")
    sp.add_argument("-o", "--output", help="report JSON (default: stdout)")
    sp.add_argument("--weights", help="comma-separated, must sum to 0")
    sp.add_argument("--preset", choices=sorted(CONTRAST_PRESETS),
                    help="reconstructed weight presets over "
                         "(unpleasant, neutral, pleasant)")
    sp.add_argument("--by", default="condition")
    sp.add_argument("--value", required=True)
    sp.add_argument("--subject", default="subject_id")
    sp.add_argument("--order", help="comma-separated condition order")
    sp.set_defaults(func=cmd_contrast)

    sp = sub.add_parser("anova", help="two-factor repeated-measures ANOVA")
    sp.add_argument("-i", "--input", required=True, help="long-format CSV")
    sp.add_argument("-o", "--output")
    sp.add_argument("--factors", required=True, help="e.g. task,condition")
    sp.add_argument("--value", required=True)
    sp.add_argument("--subject", default="subject_id")
    sp.set_defaults(func=cmd_anova)

    sp = sub.add_parser("moderate", help="parallel moderation with conditional effects")
    sp.add_argument("-i", "--input", required=True, help="subjects CSV")
    sp.add_argument("-o", "--output")
    sp.add_argument("--y", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--m1", required=True)
    sp.add_argument("--m2", required=True)
    sp.add_argument("--no-center", action="store_true")
    sp.set_defaults(func=cmd_moderate)

    sp = sub.add_parser("simulate", help="seeded synthetic cohort -> JSONL + truth")
    sp.add_argument("--spec", required=True, help="cohort spec JSON")
    sp.add_argument("--seed", type=int)
    sp.add_argument("-o", "--output", required=True, help="output directory")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("pipeline", help="simulate/ingest -> analyze -> StatReport")
    sp.add_argument("--config", help="pipeline config JSON")
    sp.add_argument("--demo", action="store_true", help="use the bundled demo config")
    sp.add_argument("--seed", type=int)
    sp.add_argument("-o", "--output", required=True, help="output directory")
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("collect", help="serve the runner and ingest uploads")
    sp.add_argument("--port", type=int, required=True)
    sp.add_argument("--out", required=True, help="directory for sessions.jsonl")
    sp.add_argument("--assets", help="task-runner static bundle directory")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(func=cmd_collect)

    sp = sub.add_parser("validate", help="schema-check session files")
    sp.add_argument("sessions", nargs="+")
    sp.add_argument("--strict", action="store_true")
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.set_defaults(func=cmd_validate)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except SystemExit:
        raise
    except ImpulsekitError as e:
        _fail(str(e))
    return 0


if __name__ == "__main__":
    sys.exit(main())
