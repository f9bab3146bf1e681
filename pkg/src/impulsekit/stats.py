"""Statistical procedures: rank-based inverse normal transform, planned
within-subject contrasts, two-factor repeated-measures ANOVA, parallel
moderation with pick-a-point conditional effects, and within-subject
error bars.

Contrasts are tested against the pooled subject-by-condition interaction
mean square by default (df = (n-1)(k-1)); the per-subject contrast-score
route (df = n-1) is always co-reported. All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtri
from scipy.stats import f as f_dist
from scipy.stats import rankdata
from scipy.stats import t as t_dist

from impulsekit.errors import (
    EmptyInput,
    InsufficientN,
    ShapeMismatch,
    SingularDesign,
    UnbalancedDesign,
    WeightsNotCentered,
)

BLOM_OFFSET = 0.375

# reconstructions of the graphical contrast weights, over conditions ordered
# (unpleasant, neutral, pleasant): emotion-general V and valence-specific L
CONTRAST_PRESETS = {
    "v_shape": (1.0, -2.0, 1.0),
    "l_shape_negative": (2.0, -1.0, -1.0),
}
PRESET_CONDITION_ORDER = ("unpleasant", "neutral", "pleasant")


@dataclass
class ConditionMatrix:
    """Complete n-subjects x k-conditions matrix of one measure."""

    subjects: List[str]
    conditions: List[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        n, k = len(self.subjects), len(self.conditions)
        if self.values.shape != (n, k):
            raise ShapeMismatch(f"values shape {self.values.shape} != ({n}, {k})")
        if n < 2 or k < 2:
            raise ShapeMismatch("need at least 2 subjects and 2 conditions")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite cell values")


def _t_ratio(estimate: float, se: float) -> float:
    """estimate/se with the zero-variance edge pinned: 0/0 -> 0 (no effect,
    no error), nonzero/0 -> signed infinity."""
    if se > 0:
        return estimate / se
    if estimate == 0:
        return 0.0
    return float(np.copysign(np.inf, estimate))


def rank_inverse_normal(values: Sequence[float]) -> np.ndarray:
    """Blom-score transform: ndtri((rank - 3/8) / (n + 1/4)), average ranks
    for ties, order-aligned with the input. Pool the vector before calling
    when groups must share a common scale."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise EmptyInput("need a 1-D vector with at least 2 values")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite input")
    ranks = rankdata(arr, method="average")
    return ndtri((ranks - BLOM_OFFSET) / (arr.size + 1.0 - 2.0 * BLOM_OFFSET))


@dataclass
class ContrastResult:
    weights: Tuple[float, ...]
    condition_means: Tuple[float, ...]
    estimate: float
    se: float
    t: float
    df: int
    p: float
    ms_error: float
    # one-sample t on per-subject contrast scores, df = n - 1
    subject_scores_se: float
    subject_scores_t: float
    subject_scores_df: int
    subject_scores_p: float


def within_subject_contrast(data: ConditionMatrix,
                            weights: Sequence[float]) -> ContrastResult:
    """Planned contrast on condition means of a repeated-measures matrix.

    Error term: subject-by-condition interaction MS, se = sqrt(MS * sum(w^2)/n),
    df = (n-1)(k-1); the subject-contrast-score alternative is co-reported.
    """
    w = np.asarray(weights, dtype=np.float64)
    n, k = data.values.shape
    if w.shape != (k,):
        raise ShapeMismatch(f"{w.size} weights for {k} conditions")
    if abs(w.sum()) > 1e-10:
        raise WeightsNotCentered(f"weights sum to {w.sum():g}")

    x = data.values
    grand = x.mean()
    row = x.mean(axis=1, keepdims=True)
    col = x.mean(axis=0, keepdims=True)
    resid = x - row - col + grand
    df_err = (n - 1) * (k - 1)
    ms_err = float(np.sum(resid ** 2)) / df_err

    estimate = float(col.ravel() @ w)
    se = float(np.sqrt(ms_err * np.sum(w ** 2) / n))
    t = _t_ratio(estimate, se)
    p = 2.0 * t_dist.sf(abs(t), df_err)

    scores = x @ w
    se_s = float(np.std(scores, ddof=1)) / np.sqrt(n)
    t_s = _t_ratio(estimate, se_s)
    p_s = 2.0 * t_dist.sf(abs(t_s), n - 1)

    return ContrastResult(weights=tuple(w), condition_means=tuple(col.ravel()),
                          estimate=estimate, se=float(se), t=float(t),
                          df=df_err, p=float(p), ms_error=ms_err,
                          subject_scores_se=se_s, subject_scores_t=float(t_s),
                          subject_scores_df=n - 1, subject_scores_p=float(p_s))


@dataclass
class AnovaEffect:
    name: str
    ss: float
    df: int
    ms: float
    error_ss: float
    error_df: int
    error_ms: float
    f: float
    p: float
    eta_squared: float          # SS_effect / SS_total
    partial_eta_squared: float  # SS_effect / (SS_effect + SS_error)


@dataclass
class AnovaTable:
    effects: Dict[str, AnovaEffect]
    ss_total: float
    ss_subject: float
    n_subjects: int
    levels: Tuple[int, int]
    effect_size_note: str = "eta_squared uses SS_total; partial uses the effect's own error term"


def rm_anova_two_factor(values: np.ndarray) -> AnovaTable:
    """Two-factor repeated-measures ANOVA on a (subject, A, B) array.

    Each within-subject effect is tested against its own subject-interaction
    error term. Complete balanced data required.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 3:
        raise UnbalancedDesign(f"expected (subject, A, B) array, got shape {x.shape}")
    n, a, b = x.shape
    if n < 2 or a < 2 or b < 2:
        raise UnbalancedDesign("need >= 2 subjects and >= 2 levels per factor")
    if not np.all(np.isfinite(x)):
        raise UnbalancedDesign("missing or non-finite cells")

    grand = x.mean()
    m_s = x.mean(axis=(1, 2))
    m_a = x.mean(axis=(0, 2))
    m_b = x.mean(axis=(0, 1))
    m_sa = x.mean(axis=2)
    m_sb = x.mean(axis=1)
    m_ab = x.mean(axis=0)

    ss_total = float(np.sum((x - grand) ** 2))
    ss_s = a * b * float(np.sum((m_s - grand) ** 2))
    ss_a = n * b * float(np.sum((m_a - grand) ** 2))
    ss_b = n * a * float(np.sum((m_b - grand) ** 2))
    ss_sa = b * float(np.sum((m_sa - m_s[:, None] - m_a[None, :] + grand) ** 2))
    ss_sb = a * float(np.sum((m_sb - m_s[:, None] - m_b[None, :] + grand) ** 2))
    ss_ab = n * float(np.sum((m_ab - m_a[:, None] - m_b[None, :] + grand) ** 2))
    ss_sab = ss_total - (ss_s + ss_a + ss_b + ss_sa + ss_sb + ss_ab)

    def effect(name, ss, df, err_ss, err_df):
        ms = ss / df
        err_ms = err_ss / err_df
        fval = ms / err_ms if err_ms > 0 else np.inf
        return AnovaEffect(name=name, ss=ss, df=df, ms=ms,
                           error_ss=err_ss, error_df=err_df, error_ms=err_ms,
                           f=float(fval), p=float(f_dist.sf(fval, df, err_df)),
                           eta_squared=ss / ss_total if ss_total > 0 else 0.0,
                           partial_eta_squared=ss / (ss + err_ss) if ss + err_ss > 0 else 0.0)

    effects = {
        "A": effect("A", ss_a, a - 1, ss_sa, (n - 1) * (a - 1)),
        "B": effect("B", ss_b, b - 1, ss_sb, (n - 1) * (b - 1)),
        "AxB": effect("AxB", ss_ab, (a - 1) * (b - 1), ss_sab,
                      (n - 1) * (a - 1) * (b - 1)),
    }
    return AnovaTable(effects=effects, ss_total=ss_total, ss_subject=ss_s,
                      n_subjects=n, levels=(a, b))


@dataclass
class ConditionalEffect:
    m1_label: str
    m2_label: str
    m1_value: float
    m2_value: float
    estimate: float
    se: float
    t: float
    df: int
    p: float
    ci_low: float
    ci_high: float


@dataclass
class InteractionTest:
    term: str
    delta_r2: float
    f_change: float
    df: Tuple[int, int]
    p: float


@dataclass
class ModerationResult:
    """y = b0 + b1 x + b2 m1 + b3 m2 + b4 x*m1 + b5 x*m2."""

    coefficients: np.ndarray
    se: np.ndarray
    t: np.ndarray
    p: np.ndarray
    r2: float
    f_overall: float
    f_df: Tuple[int, int]
    f_p: float
    mse: float
    interaction_tests: List[InteractionTest]
    conditional_effects: List[ConditionalEffect]
    centered: bool
    m1_mean: float
    m1_sd: float
    m2_mean: float
    m2_sd: float
    term_names: Tuple[str, ...] = ("intercept", "x", "m1", "m2", "x:m1", "x:m2")


def _ols(X: np.ndarray, y: np.ndarray):
    xtx = X.T @ X
    if np.linalg.cond(xtx) > 1e12:
        raise SingularDesign("collinear predictors")
    b = np.linalg.solve(xtx, X.T @ y)
    resid = y - X @ b
    return b, float(resid @ resid), np.linalg.inv(xtx)


def parallel_moderation(y: Sequence[float], x: Sequence[float],
                        m1: Sequence[float], m2: Sequence[float],
                        center: bool = True) -> ModerationResult:
    """OLS moderation with two parallel moderators of one focal predictor.

    Predictors are mean-centered before products (center=True); conditional
    effects of x are evaluated on the 3x3 grid of moderator values
    mean - 1SD / mean / mean + 1SD, each with its t(n-6) test and 95% CI.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    n = y.size
    if not (x.size == m1.size == m2.size == n):
        raise ShapeMismatch("y, x, m1, m2 must share length")
    if n <= 6:
        raise InsufficientN(f"need n > 6, got {n}")
    if not all(np.all(np.isfinite(v)) for v in (y, x, m1, m2)):
        raise ValueError("non-finite input")
    if any(np.std(v) == 0 for v in (x, m1, m2)):
        raise SingularDesign("constant predictor")

    if center:
        x = x - x.mean()
        m1 = m1 - m1.mean()
        m2 = m2 - m2.mean()
    m1_mean, m2_mean = float(m1.mean()), float(m2.mean())
    m1_sd, m2_sd = float(np.std(m1, ddof=1)), float(np.std(m2, ddof=1))

    X = np.column_stack([np.ones(n), x, m1, m2, x * m1, x * m2])
    b, sse, xtx_inv = _ols(X, y)
    df_resid = n - 6
    mse = sse / df_resid
    cov = mse * xtx_inv
    se = np.sqrt(np.diag(cov))
    tvals = np.array([_t_ratio(bi, si) for bi, si in zip(b, se)])
    pvals = 2.0 * t_dist.sf(np.abs(tvals), df_resid)

    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - sse / sst if sst > 0 else 0.0
    unexplained = (1.0 - r2) / df_resid
    f_overall = (r2 / 5.0) / unexplained if unexplained > 0 else np.inf
    f_p = float(f_dist.sf(f_overall, 5, df_resid))

    tests = []
    for col, term in ((4, "x:m1"), (5, "x:m2")):
        keep = [c for c in range(6) if c != col]
        _, sse_red, _ = _ols(X[:, keep], y)
        r2_red = 1.0 - sse_red / sst if sst > 0 else 0.0
        dr2 = r2 - r2_red
        f_change = dr2 / unexplained if unexplained > 0 else (
            np.inf if dr2 > 0 else 0.0)
        tests.append(InteractionTest(term=term, delta_r2=float(dr2),
                                     f_change=float(f_change),
                                     df=(1, df_resid),
                                     p=float(f_dist.sf(f_change, 1, df_resid))))

    t_crit = float(t_dist.ppf(0.975, df_resid))
    labels = ("mean-1sd", "mean", "mean+1sd")
    offsets = (-1.0, 0.0, 1.0)
    cond: List[ConditionalEffect] = []
    for lab1, o1 in zip(labels, offsets):
        for lab2, o2 in zip(labels, offsets):
            v1 = m1_mean + o1 * m1_sd
            v2 = m2_mean + o2 * m2_sd
            g = np.array([0.0, 1.0, 0.0, 0.0, v1, v2])
            est = float(g @ b)
            se_c = float(np.sqrt(max(g @ cov @ g, 0.0)))
            t_c = _t_ratio(est, se_c)
            cond.append(ConditionalEffect(
                m1_label=lab1, m2_label=lab2, m1_value=v1, m2_value=v2,
                estimate=est, se=se_c, t=float(t_c), df=df_resid,
                p=float(2.0 * t_dist.sf(abs(t_c), df_resid)),
                ci_low=est - t_crit * se_c, ci_high=est + t_crit * se_c))

    return ModerationResult(coefficients=b, se=se, t=tvals, p=pvals, r2=float(r2),
                            f_overall=float(f_overall), f_df=(5, df_resid),
                            f_p=f_p, mse=float(mse), interaction_tests=tests,
                            conditional_effects=cond, centered=center,
                            m1_mean=m1_mean, m1_sd=m1_sd,
                            m2_mean=m2_mean, m2_sd=m2_sd)


def within_subject_sem(data: ConditionMatrix) -> np.ndarray:
    """Per-condition error-bar half-widths: Cousineau normalization (remove
    subject means, add back the grand mean) then SEM scaled by the Morey
    factor sqrt(k/(k-1))."""
    x = data.values
    n, k = x.shape
    normalized = x - x.mean(axis=1, keepdims=True) + x.mean()
    sem = np.std(normalized, axis=0, ddof=1) / np.sqrt(n)
    return sem * np.sqrt(k / (k - 1.0))
