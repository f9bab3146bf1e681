"""CSV table output: documented headers, empty fields for missing values,
atomic replace on write."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Sequence

FEATURE_COLUMNS = [
    "subject_id", "session", "trial_id", "task", "condition", "kind",
    "coherence", "ssd_ms", "responded", "rt_ms", "correct", "choice",
    "total_distance", "max_velocity", "max_acceleration", "auc",
    "stopping_distance", "auc_chord_fallback",
]

SUBJECT_COLUMNS = [
    "subject_id", "n_trials", "n_go", "n_stop", "stop_failure_rate",
    "commission_error", "commission_convention", "ssrt", "go_rt_mean",
    "go_rt_sd", "stop_rt_mean", "stop_rt_sd", "go_accuracy",
    "go_max_velocity_sd", "control_consistency", "accepted", "reject_reasons",
]

FIT_COLUMNS = [
    "subject_id", "k", "beta", "log_likelihood", "converged", "at_bound",
    "model_variant", "method", "n_trials", "control_consistency",
]

BY_CONDITION_COLUMNS = [
    "subject_id", "condition", "n_go", "n_stop", "go_accuracy",
    "stop_failure_rate", "go_max_velocity_sd", "stopping_distance_mean",
    "max_velocity_mean", "auc_mean", "total_distance_mean",
]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv_text(columns: Sequence[str], rows: List[Dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path, columns: Sequence[str], rows: List[Dict]):
    """Atomic CSV write (temp file + rename in the target directory)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv_text(columns, rows))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def column_floats(rows: List[Dict[str, str]], name: str) -> List[float]:
    """Numeric column with '' treated as missing (error: caller must filter)."""
    out = []
    for i, row in enumerate(rows):
        val = row.get(name, "")
        if val == "" or val is None:
            raise ValueError(f"row {i}: missing value in column {name!r}")
        out.append(float(val))
    return out
