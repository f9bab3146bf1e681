"""Canonical session-log wire format: parsing, validation, serialization.

One session is one JSON object; corpora are JSONL (one session per line).
Pointer samples are [t_ms, x, y] triples in the normalized screen frame
((0,0) center, (1,1) top-right), timestamps strictly increasing.

Parsing is strict about structure (schema version, enums, per-trial
invariants, timestamp monotonicity) and lenient about protocol parameters:
ssd/coherence values outside the documented sets, or SST response times
beyond the 3000 ms window, produce warnings by default and errors under
strict=True, so third-party task variants stay ingestible. Unknown fields
are preserved for round-tripping and flagged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from impulsekit.errors import MonotonicityError, SchemaError, SessionRangeError
from impulsekit.metrics import (
    COHERENCE_SET,
    RESPONSE_WINDOW_MS,
    SSD_SET,
    TrialRecord,
)
from impulsekit.trajectory import DEFAULT_START, Trajectory

SCHEMA_VERSIONS = ("1.0",)
SESSIONS = ("emotional", "neutral", "synthetic")
DEVICES = ("mouse", "trackpad", "other")
TASKS = ("sst", "ddt")
KINDS = ("go", "stop")
CONDITIONS = ("pleasant", "unpleasant", "neutral")
CHOICES = ("sooner_smaller", "larger_later")

_TRIAL_FIELDS = {
    "trial_id", "task", "condition", "kind", "coherence", "ssd_ms",
    "responded", "rt_ms", "correct", "choice", "samples", "start", "target",
    "amount_ss", "delay_ss", "amount_ll", "delay_ll", "is_control",
    "valence", "arousal", "slider_touched",
}
_SESSION_FIELDS = {
    "schema_version", "subject_id", "session", "device", "created_at",
    "trials", "scale_scores", "runner_config",
}


@dataclass
class SessionLog:
    subject_id: str
    session: str
    device: str
    trials: List[TrialRecord]
    schema_version: str = "1.0"
    created_at: Optional[str] = None
    scale_scores: Dict[str, float] = field(default_factory=dict)
    runner_config: Optional[Dict[str, object]] = None
    extra: Dict[str, object] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)  # parse-time, not serialized


def _fail(path: str, msg: str, cls=SchemaError):
    raise cls(f"{path}: {msg}")


def _expect(obj, path, key, types, required=True, enum=None):
    if key not in obj or obj[key] is None:
        if required:
            _fail(f"{path}.{key}", "missing required field")
        return None
    val = obj[key]
    if types is bool:
        if not isinstance(val, bool):
            _fail(f"{path}.{key}", f"expected boolean, got {type(val).__name__}")
    elif types is str:
        if not isinstance(val, str):
            _fail(f"{path}.{key}", f"expected string, got {type(val).__name__}")
    elif types is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            _fail(f"{path}.{key}", f"expected number, got {type(val).__name__}")
        val = float(val)
    if enum is not None and val not in enum:
        _fail(f"{path}.{key}", f"{val!r} not in {sorted(enum)}")
    return val


def _soft(warnings: List[str], strict: bool, path: str, msg: str):
    if strict:
        _fail(path, msg, SessionRangeError)
    warnings.append(f"{path}: {msg}")


def _parse_point(obj, path, key) -> Optional[Tuple[float, float]]:
    if key not in obj or obj[key] is None:
        return None
    val = obj[key]
    if (not isinstance(val, (list, tuple)) or len(val) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in val)):
        _fail(f"{path}.{key}", "expected [x, y] pair of numbers")
    return (float(val[0]), float(val[1]))


def _parse_samples(raw, path, warnings, strict) -> Trajectory:
    if not isinstance(raw, list):
        _fail(path, "samples must be an array of [t_ms, x, y]")
    try:
        arr = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError):
        _fail(path, "samples must be numeric [t_ms, x, y] triples")
    if arr.size and (arr.ndim != 2 or arr.shape[1] != 3):
        _fail(path, "each sample must be a [t_ms, x, y] triple")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        _fail(f"{path}[{bad[0]}]", "non-finite sample value")
    if arr.size:
        t = arr[:, 0]
        if t[0] < 0:
            _fail(f"{path}[0]", "negative timestamp")
        if t.size >= 2:
            dt = np.diff(t)
            if np.any(dt <= 0):
                i = int(np.argmax(dt <= 0))
                _fail(f"{path}[{i + 1}]",
                      f"timestamps not strictly increasing ({t[i]:g} -> {t[i + 1]:g})",
                      MonotonicityError)
        if np.any(t != np.round(t)):
            _soft(warnings, strict, path, "non-integer t_ms values")
    return arr


def _parse_trial(obj, idx: int, seen_ids: set, warnings: List[str],
                 strict: bool) -> TrialRecord:
    path = f"trials[{idx}]"
    if not isinstance(obj, dict):
        _fail(path, "trial must be an object")
    trial_id = _expect(obj, path, "trial_id", str)
    if trial_id in seen_ids:
        _fail(f"{path}.trial_id", f"duplicate trial id {trial_id!r}")
    seen_ids.add(trial_id)

    task = _expect(obj, path, "task", str, enum=TASKS)
    condition = _expect(obj, path, "condition", str, enum=CONDITIONS)
    responded = _expect(obj, path, "responded", bool)
    rt = _expect(obj, path, "rt_ms", float, required=False)
    if responded and rt is None:
        _fail(f"{path}.rt_ms", f"missing for responded trial {trial_id!r}")
    if not responded and rt is not None:
        _fail(f"{path}.rt_ms", f"present but trial {trial_id!r} has no response")

    kind = coherence = ssd = None
    choice = amount_ss = delay_ss = amount_ll = delay_ll = is_control = None
    if task == "sst":
        kind = _expect(obj, path, "kind", str, enum=KINDS)
        coherence = _expect(obj, path, "coherence", float, required=False)
        if coherence is not None and coherence not in COHERENCE_SET:
            _soft(warnings, strict, f"{path}.coherence",
                  f"{coherence:g} outside documented set {COHERENCE_SET}")
        ssd = _expect(obj, path, "ssd_ms", float, required=False)
        if kind == "stop":
            if ssd is None:
                _fail(f"{path}.ssd_ms", f"missing for stop trial {trial_id!r}")
            if ssd not in SSD_SET:
                _soft(warnings, strict, f"{path}.ssd_ms",
                      f"{ssd:g} outside documented set {SSD_SET}")
        elif ssd is not None:
            _fail(f"{path}.ssd_ms", f"present on go trial {trial_id!r}")
        if rt is not None and rt > RESPONSE_WINDOW_MS:
            _soft(warnings, strict, f"{path}.rt_ms",
                  f"{rt:g} exceeds the {RESPONSE_WINDOW_MS:g} ms window")
    else:
        choice = _expect(obj, path, "choice", str, required=responded, enum=CHOICES)
        amount_ss = _expect(obj, path, "amount_ss", float)
        delay_ss = _expect(obj, path, "delay_ss", float)
        amount_ll = _expect(obj, path, "amount_ll", float)
        delay_ll = _expect(obj, path, "delay_ll", float)
        is_control = bool(_expect(obj, path, "is_control", bool))
        if delay_ss > delay_ll:
            _fail(f"{path}.delay_ss", f"exceeds delay_ll on trial {trial_id!r}")
        if not is_control and amount_ll <= amount_ss:
            _fail(f"{path}.amount_ll",
                  f"must exceed amount_ss on non-control trial {trial_id!r}")

    samples = _parse_samples(obj.get("samples", []), f"{path}.samples",
                             warnings, strict)
    start = _parse_point(obj, path, "start") or DEFAULT_START
    target = _parse_point(obj, path, "target")

    unknown = set(obj) - _TRIAL_FIELDS
    if unknown:
        warnings.append(f"{path}: unknown fields preserved: {sorted(unknown)}")

    trial = TrialRecord(
        trial_id=trial_id, task=task, condition=condition, responded=responded,
        trajectory=Trajectory(samples, start=start, target=target),
        kind=kind, coherence=None if coherence is None else int(coherence),
        ssd=ssd, rt=rt,
        correct=_expect(obj, path, "correct", bool, required=False),
        choice=choice, amount_ss=amount_ss, delay_ss=delay_ss,
        amount_ll=amount_ll, delay_ll=delay_ll, is_control=is_control,
        valence=_expect(obj, path, "valence", float, required=False),
        arousal=_expect(obj, path, "arousal", float, required=False),
        slider_touched=_expect(obj, path, "slider_touched", bool, required=False),
    )
    trial.extra = {k: obj[k] for k in unknown}
    return trial


def parse_session(data, strict: bool = False) -> SessionLog:
    """Parse and validate one SessionLog from JSON text/bytes or a dict."""
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    if isinstance(data, str):
        try:
            obj = json.loads(data)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e}") from None
    else:
        obj = data
    if not isinstance(obj, dict):
        raise SchemaError("session must be a JSON object")

    version = _expect(obj, "$", "schema_version", str)
    if version not in SCHEMA_VERSIONS:
        _fail("$.schema_version",
              f"unknown version {version!r}; supported: {list(SCHEMA_VERSIONS)}")
    warnings: List[str] = []
    subject_id = _expect(obj, "$", "subject_id", str)
    if not subject_id:
        _fail("$.subject_id", "must be non-empty")
    session = _expect(obj, "$", "session", str, enum=SESSIONS)
    device = _expect(obj, "$", "device", str, enum=DEVICES)
    created_at = _expect(obj, "$", "created_at", str, required=False)

    raw_trials = obj.get("trials")
    if not isinstance(raw_trials, list):
        _fail("$.trials", "missing or not an array")
    seen: set = set()
    trials = [_parse_trial(t, i, seen, warnings, strict)
              for i, t in enumerate(raw_trials)]

    scores = obj.get("scale_scores") or {}
    if not isinstance(scores, dict):
        _fail("$.scale_scores", "must be an object of named numbers")
    for name, val in scores.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            _fail(f"$.scale_scores.{name}", "must be a number")

    runner_config = obj.get("runner_config")
    if runner_config is not None and not isinstance(runner_config, dict):
        _fail("$.runner_config", "must be an object")

    unknown = set(obj) - _SESSION_FIELDS
    if unknown:
        warnings.append(f"$: unknown fields preserved: {sorted(unknown)}")

    return SessionLog(subject_id=subject_id, session=session, device=device,
                      trials=trials, schema_version=version,
                      created_at=created_at,
                      scale_scores={k: float(v) for k, v in scores.items()},
                      runner_config=runner_config,
                      extra={k: obj[k] for k in unknown}, warnings=warnings)


def _num(x: float):
    """Ints stay ints on the wire (t_ms and protocol params are integral)."""
    if x is None:
        return None
    f = float(x)
    return int(f) if f.is_integer() and abs(f) < 2 ** 53 else f


def trial_to_dict(t: TrialRecord) -> dict:
    d: Dict[str, object] = {"trial_id": t.trial_id, "task": t.task,
                            "condition": t.condition}
    if t.task == "sst":
        d["kind"] = t.kind
        if t.coherence is not None:
            d["coherence"] = int(t.coherence)
        if t.ssd is not None:
            d["ssd_ms"] = _num(t.ssd)
    d["responded"] = t.responded
    if t.rt is not None:
        d["rt_ms"] = _num(t.rt)
    if t.correct is not None:
        d["correct"] = t.correct
    if t.task == "ddt":
        d["choice"] = t.choice
        d["amount_ss"] = _num(t.amount_ss)
        d["delay_ss"] = _num(t.delay_ss)
        d["amount_ll"] = _num(t.amount_ll)
        d["delay_ll"] = _num(t.delay_ll)
        d["is_control"] = bool(t.is_control)
    if t.valence is not None:
        d["valence"] = float(t.valence)
    if t.arousal is not None:
        d["arousal"] = float(t.arousal)
    if t.slider_touched is not None:
        d["slider_touched"] = bool(t.slider_touched)
    traj = t.trajectory
    d["start"] = [_num(traj.start[0]), _num(traj.start[1])]
    if traj.target is not None:
        d["target"] = [_num(traj.target[0]), _num(traj.target[1])]
    d["samples"] = [[_num(ti), float(xi), float(yi)]
                    for ti, xi, yi in zip(traj.t, traj.x, traj.y)]
    for k in sorted(getattr(t, "extra", {}) or {}):
        d[k] = t.extra[k]
    return d


def session_to_dict(log: SessionLog) -> dict:
    d: Dict[str, object] = {
        "schema_version": log.schema_version,
        "subject_id": log.subject_id,
        "session": log.session,
        "device": log.device,
    }
    if log.created_at is not None:
        d["created_at"] = log.created_at
    if log.scale_scores:
        d["scale_scores"] = {k: _num(log.scale_scores[k])
                             for k in sorted(log.scale_scores)}
    if log.runner_config is not None:
        d["runner_config"] = log.runner_config
    d["trials"] = [trial_to_dict(t) for t in log.trials]
    for k in sorted(log.extra or {}):
        d[k] = log.extra[k]
    return d


def serialize_session(log: SessionLog) -> str:
    """Canonical single-line JSON for one session (JSONL-safe)."""
    return json.dumps(session_to_dict(log), separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False)


def write_sessions_jsonl(path, logs: Iterable[SessionLog]):
    with open(path, "w", encoding="utf-8") as fh:
        for log in logs:
            fh.write(serialize_session(log))
            fh.write("\n")


def iter_sessions(path, strict: bool = False):
    """Yield SessionLogs from a .json (single object) or .jsonl file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        return
    try:
        whole = json.loads(text)
    except json.JSONDecodeError:
        whole = None
    if isinstance(whole, dict):  # a single pretty-printed or compact object
        yield parse_session(whole, strict=strict)
        return
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            yield parse_session(line, strict=strict)
        except SchemaError as e:
            raise SchemaError(f"{path}:{i + 1}: {e}") from None
