"""StatReport assembly, canonical serialization, and text rendering.

Reports must be byte-identical given equal inputs and options, so:
no wall-clock timestamps, keys sorted, and every float pinned to 12
significant digits at serialization time (absorbs last-ulp platform noise
without losing meaningful precision).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from impulsekit import __version__

FLOAT_SIG_DIGITS = 12


def pin_floats(obj):
    """Recursively normalize numbers/containers for canonical JSON."""
    if isinstance(obj, dict):
        return {str(k): pin_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [pin_floats(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return pin_floats(dataclasses.asdict(obj))
    if isinstance(obj, np.ndarray):
        return pin_floats(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if f != f:  # NaN has no JSON form
            return None
        if f in (float("inf"), float("-inf")):
            return "inf" if f > 0 else "-inf"
        return float(f"{f:.{FLOAT_SIG_DIGITS}g}")
    return obj


def canonical_json(obj) -> str:
    return json.dumps(pin_floats(obj), sort_keys=True, indent=2,
                      ensure_ascii=False, allow_nan=False) + "\n"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return f"sha256:{h.hexdigest()}"


def text_digest(text: str) -> str:
    return f"sha256:{hashlib.sha256(text.encode('utf-8')).hexdigest()}"


def atomic_write_text(path, text: str):
    """Write-to-temp + rename so partial outputs are never observable."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_report(options: Dict, inputs: Dict[str, str], results: Dict) -> Dict:
    """The StatReport object: everything a reader needs to reproduce it."""
    return {
        "tool_version": __version__,
        "inputs": inputs,
        "options": options,
        "results": results,
    }


def write_report(report: Dict, json_path, text_path: Optional[object] = None):
    atomic_write_text(json_path, canonical_json(report))
    if text_path is not None:
        atomic_write_text(text_path, render_text(report))


def write_meta(output_path, options: Dict, inputs: Dict[str, str]):
    """Sidecar recording the resolved options of a table-producing command."""
    meta = {"tool_version": __version__, "options": options, "inputs": inputs}
    atomic_write_text(str(output_path) + ".meta.json", canonical_json(meta))


def _fmt(v, nd=4):
    if isinstance(v, float):
        return f"{v:.{nd}g}"
    return str(v)


def render_text(report: Dict) -> str:
    """Human-readable summary rendered from the same data as the JSON."""
    lines = [f"impulsekit report (tool {report['tool_version']})", ""]
    if report.get("options"):
        lines.append("options:")
        for k in sorted(report["options"]):
            lines.append(f"  {k} = {json.dumps(pin_floats(report['options'][k]), sort_keys=True)}")
        lines.append("")
    if report.get("inputs"):
        lines.append("inputs:")
        for k in sorted(report["inputs"]):
            lines.append(f"  {k}: {report['inputs'][k]}")
        lines.append("")
    results = report.get("results", {})

    def section(title):
        lines.append(title)
        lines.append("-" * len(title))

    if "cohort" in results:
        section("cohort")
        for k, v in sorted(results["cohort"].items()):
            lines.append(f"  {k}: {_fmt(v)}")
        lines.append("")
    if "subjects" in results:
        rows = results["subjects"]
        section(f"subjects (n = {len(rows)})")
        keys = ["subject_id", "ssrt", "stop_failure_rate", "go_accuracy",
                "go_max_velocity_sd", "k", "accepted"]
        lines.append("  " + "  ".join(f"{k:>18}" for k in keys))
        for row in rows:
            lines.append("  " + "  ".join(
                f"{_fmt(row.get(k, ''), 5):>18}" if row.get(k) is not None else f"{'':>18}"
                for k in keys))
        lines.append("")
    if "contrast" in results:
        c = results["contrast"]
        section("within-subject contrast")
        lines.append(f"  measure: {c.get('measure')}  weights: {c.get('weights')}"
                     f"  order: {c.get('condition_order')}")
        lines.append(f"  estimate = {_fmt(c['estimate'])}, se = {_fmt(c['se'])},"
                     f" t({c['df']}) = {_fmt(c['t'])}, p = {_fmt(c['p'])}")
        lines.append(f"  subject-score route: t({c['subject_scores_df']}) ="
                     f" {_fmt(c['subject_scores_t'])}, p = {_fmt(c['subject_scores_p'])}")
        lines.append("")
    if "within_subject_sem" in results:
        s = results["within_subject_sem"]
        section("within-subject error bars")
        for cond, val in zip(s["conditions"], s["sem"]):
            lines.append(f"  {cond}: {_fmt(val)}")
        lines.append("")
    if "anova" in results:
        a = results["anova"]
        section(f"repeated-measures ANOVA ({a.get('factor_a')} x {a.get('factor_b')})")
        for name, eff in a["effects"].items():
            lines.append(
                f"  {name}: F({eff['df']}, {eff['error_df']}) = {_fmt(eff['f'])},"
                f" p = {_fmt(eff['p'])}, eta2 = {_fmt(eff['eta_squared'])},"
                f" partial eta2 = {_fmt(eff['partial_eta_squared'])}")
        lines.append("")
    if "moderation" in results:
        m = results["moderation"]
        section("parallel moderation")
        lines.append(f"  model: y={m['y']} x={m['x']} m1={m['m1']} m2={m['m2']}"
                     f" centered={m['centered']}")
        lines.append(f"  R2 = {_fmt(m['r2'])}, F({m['f_df'][0]}, {m['f_df'][1]}) ="
                     f" {_fmt(m['f_overall'])}, p = {_fmt(m['f_p'])}")
        for t in m["interaction_tests"]:
            lines.append(f"  {t['term']}: dR2 = {_fmt(t['delta_r2'])},"
                         f" F(1, {t['df'][1]}) = {_fmt(t['f_change'])}, p = {_fmt(t['p'])}")
        lines.append("  conditional effects of x (m1 rows, m2 columns):")
        for c in m["conditional_effects"]:
            lines.append(
                f"    m1 {c['m1_label']:>9}, m2 {c['m2_label']:>9}:"
                f" b = {_fmt(c['estimate'])}, se = {_fmt(c['se'])},"
                f" t({c['df']}) = {_fmt(c['t'])}, p = {_fmt(c['p'])},"
                f" 95% CI [{_fmt(c['ci_low'])}, {_fmt(c['ci_high'])}]")
        lines.append("")
    if "recovery" in results:
        section("ground-truth recovery")
        for k, v in sorted(results["recovery"].items()):
            lines.append(f"  {k}: {_fmt(v)}")
        lines.append("")
    return "\n".join(lines) + "\n"
