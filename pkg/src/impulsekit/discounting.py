"""Hyperbolic delay-discounting model and per-subject maximum-likelihood fit.

Two model variants are carried side by side because the source equation and
its prose description disagree:

* softmax_hyperbolic (default): V = A/(1 + kD), with beta acting as the
  inverse temperature of a logistic choice rule.
* literal_exponent: V = A/(1 + kD)^beta with a unit-temperature logistic
  choice rule, i.e. beta read as an exponent on the denominator.

The fit is a dense log-spaced grid search followed by coordinate-wise
golden-section refinement; deterministic for fixed input, with ties broken
toward smaller k then smaller beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import expit

from impulsekit.errors import InvalidParameter, NoControlTrials

VARIANTS = ("softmax_hyperbolic", "literal_exponent")
VARIANT_ALIASES = {"softmax": "softmax_hyperbolic", "literal": "literal_exponent"}

K_BOUNDS = (1e-5, 10.0)
BETA_BOUNDS = (0.01, 100.0)
GRID_LOG10_K = np.round(np.arange(-5.0, 1.0 + 1e-9, 0.05), 10)
GRID_LOG10_BETA = np.round(np.arange(-2.0, 2.0 + 1e-9, 0.05), 10)
PROB_FLOOR = 1e-12

# standard offer design: 10 immediate amounts vs $100 at 8 delays, + controls
AMOUNTS_SS = (10, 20, 30, 40, 50, 60, 70, 80, 90, 99)
DELAYS_LL = (1, 7, 14, 30, 60, 90, 180, 365)
AMOUNT_LL = 100.0
N_CONTROL = 10


@dataclass(frozen=True)
class ChoiceTrial:
    amount_ss: float
    delay_ss: float      # days; 0 = immediate
    amount_ll: float
    delay_ll: float
    chosen: str          # "sooner_smaller" | "larger_later"
    is_control: bool = False

    def __post_init__(self):
        if self.delay_ss > self.delay_ll:
            raise ValueError("delay_ss must be <= delay_ll")
        if not self.is_control and self.amount_ll <= self.amount_ss:
            raise ValueError("amount_ll must exceed amount_ss on non-control trials")
        if self.chosen not in ("sooner_smaller", "larger_later"):
            raise ValueError(f"bad choice {self.chosen!r}")


@dataclass
class DiscountFit:
    k: float
    beta: float
    log_likelihood: float
    converged: bool
    at_bound: bool
    model_variant: str
    method: str = "grid+golden_mle"
    n_trials: int = 0


def _canon_variant(variant: str) -> str:
    variant = VARIANT_ALIASES.get(variant, variant)
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    return variant


def _check_params(k: float, beta: float):
    if not (k > 0) or not np.isfinite(k):
        raise InvalidParameter(f"k must be positive and finite, got {k!r}")
    if not (beta > 0) or not np.isfinite(beta):
        raise InvalidParameter(f"beta must be positive and finite, got {beta!r}")


def subjective_value(amount, delay, k: float, beta: float = 1.0,
                     variant: str = "softmax_hyperbolic"):
    """Discounted value of `amount` at `delay` days."""
    variant = _canon_variant(variant)
    _check_params(k, beta)
    amount = np.asarray(amount, dtype=np.float64)
    delay = np.asarray(delay, dtype=np.float64)
    denom = 1.0 + k * delay
    if variant == "literal_exponent":
        denom = denom ** beta
    out = amount / denom
    return float(out) if out.ndim == 0 else out


def choice_probability(trial: ChoiceTrial, k: float, beta: float,
                       variant: str = "softmax_hyperbolic") -> float:
    """Probability of choosing the larger-later option."""
    variant = _canon_variant(variant)
    _check_params(k, beta)
    v_ll = subjective_value(trial.amount_ll, trial.delay_ll, k, beta, variant)
    v_ss = subjective_value(trial.amount_ss, trial.delay_ss, k, beta, variant)
    z = (v_ll - v_ss) if variant == "literal_exponent" else beta * (v_ll - v_ss)
    return float(np.clip(expit(z), PROB_FLOOR, 1.0 - PROB_FLOOR))


def _choice_arrays(choices: Sequence[ChoiceTrial]):
    informative = [c for c in choices if not c.is_control]
    a_ss = np.array([c.amount_ss for c in informative], dtype=np.float64)
    d_ss = np.array([c.delay_ss for c in informative], dtype=np.float64)
    a_ll = np.array([c.amount_ll for c in informative], dtype=np.float64)
    d_ll = np.array([c.delay_ll for c in informative], dtype=np.float64)
    took_ll = np.array([c.chosen == "larger_later" for c in informative], dtype=bool)
    return a_ss, d_ss, a_ll, d_ll, took_ll


def log_likelihood(choices: Sequence[ChoiceTrial], k: float, beta: float,
                   variant: str = "softmax_hyperbolic") -> float:
    """Sum of log P(chosen) over non-control trials, with clamped probabilities."""
    variant = _canon_variant(variant)
    _check_params(k, beta)
    a_ss, d_ss, a_ll, d_ll, took_ll = _choice_arrays(choices)
    with np.errstate(over="ignore"):  # extreme beta overflows to inf -> V = 0
        if variant == "literal_exponent":
            z = a_ll / (1.0 + k * d_ll) ** beta - a_ss / (1.0 + k * d_ss) ** beta
        else:
            z = beta * (a_ll / (1.0 + k * d_ll) - a_ss / (1.0 + k * d_ss))
    p_ll = np.clip(expit(z), PROB_FLOOR, 1.0 - PROB_FLOOR)
    p = np.where(took_ll, p_ll, 1.0 - p_ll)
    return float(np.sum(np.log(p)))


def _loglik_grid(a_ss, d_ss, a_ll, d_ll, took_ll, variant: str) -> np.ndarray:
    """Log-likelihood surface over the (k, beta) search grid, shape (nk, nbeta)."""
    k = (10.0 ** GRID_LOG10_K)[:, None, None]
    beta = (10.0 ** GRID_LOG10_BETA)[None, :, None]
    with np.errstate(over="ignore"):  # extreme beta overflows to inf -> V = 0
        if variant == "literal_exponent":
            z = (a_ll / (1.0 + k * d_ll) ** beta - a_ss / (1.0 + k * d_ss) ** beta)
        else:
            dv = a_ll / (1.0 + k * d_ll) - a_ss / (1.0 + k * d_ss)  # (nk, 1, T)
            z = beta * dv
    p_ll = np.clip(expit(z), PROB_FLOOR, 1.0 - PROB_FLOOR)
    p = np.where(took_ll, p_ll, 1.0 - p_ll)
    return np.sum(np.log(p), axis=-1)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
# golden-section tolerance in log10 space equal to 1e-6 relative in k/beta
_XTOL_LOG10 = 1e-6 / math.log(10.0)
_BOUND_SNAP_LOG10 = 1e-4


def _golden_max(f, lo: float, hi: float) -> float:
    """Maximize unimodal f on [lo, hi]; ties resolve toward the left."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > _XTOL_LOG10:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit_discounting(choices: Sequence[ChoiceTrial],
                    variant: str = "softmax_hyperbolic") -> DiscountFit:
    """Maximum-likelihood (k, beta) for one subject.

    Dense grid search (log10 k in [-5, 1], log10 beta in [-2, 2], step 0.05)
    followed by coordinate-wise golden-section refinement. When every
    non-control choice is identical the likelihood is monotone in k, so the
    fit lands on a bound; it is returned clamped with at_bound set rather
    than raised.
    """
    variant = _canon_variant(variant)
    a_ss, d_ss, a_ll, d_ll, took_ll = _choice_arrays(choices)
    if took_ll.size == 0:
        raise ValueError("no non-control choice trials to fit")
    informative = 0 < int(took_ll.sum()) < took_ll.size

    surface = _loglik_grid(a_ss, d_ss, a_ll, d_ll, took_ll, variant)
    ik, ib = np.unravel_index(int(np.argmax(surface)), surface.shape)
    lk, lb = float(GRID_LOG10_K[ik]), float(GRID_LOG10_BETA[ib])
    best_ll = float(surface[ik, ib])

    def ll_at(lk_, lb_):
        return log_likelihood(choices, 10.0 ** lk_, 10.0 ** lb_, variant)

    # coordinate sweeps; the grid argmax brackets the optimum to +-1 step
    step = 0.05
    for _ in range(50):
        lk_new = _golden_max(lambda v: ll_at(v, lb),
                             max(GRID_LOG10_K[0], lk - step),
                             min(GRID_LOG10_K[-1], lk + step))
        lb_new = _golden_max(lambda v: ll_at(lk_new, v),
                             max(GRID_LOG10_BETA[0], lb - step),
                             min(GRID_LOG10_BETA[-1], lb + step))
        moved = max(abs(lk_new - lk), abs(lb_new - lb))
        lk, lb = lk_new, lb_new
        if moved < _XTOL_LOG10:
            break

    at_bound = False
    if lk <= GRID_LOG10_K[0] + _BOUND_SNAP_LOG10:
        lk, at_bound = float(GRID_LOG10_K[0]), True
    elif lk >= GRID_LOG10_K[-1] - _BOUND_SNAP_LOG10:
        lk, at_bound = float(GRID_LOG10_K[-1]), True
    if lb <= GRID_LOG10_BETA[0] + _BOUND_SNAP_LOG10:
        lb, at_bound = float(GRID_LOG10_BETA[0]), True
    elif lb >= GRID_LOG10_BETA[-1] - _BOUND_SNAP_LOG10:
        lb, at_bound = float(GRID_LOG10_BETA[-1]), True

    refined_ll = ll_at(lk, lb)
    if refined_ll < best_ll:  # refinement must never lose to the grid
        lk, lb = float(GRID_LOG10_K[ik]), float(GRID_LOG10_BETA[ib])
        refined_ll = best_ll

    return DiscountFit(k=10.0 ** lk, beta=10.0 ** lb,
                       log_likelihood=float(refined_ll),
                       converged=informative, at_bound=at_bound,
                       model_variant=variant, n_trials=int(took_ll.size))


def control_consistency(choices: Sequence[ChoiceTrial]) -> float:
    """Fraction of control trials where the larger amount was picked."""
    controls = [c for c in choices if c.is_control]
    if not controls:
        raise NoControlTrials("no control trials")
    hits = 0
    for c in controls:
        larger = "larger_later" if c.amount_ll >= c.amount_ss else "sooner_smaller"
        hits += c.chosen == larger
    return hits / len(controls)


def choice_trials_from_records(trials) -> List[ChoiceTrial]:
    """ChoiceTrials from responded DDT TrialRecords carrying offer fields."""
    out = []
    for t in trials:
        if getattr(t, "task", None) != "ddt" or not t.responded or t.choice is None:
            continue
        if t.amount_ss is None or t.amount_ll is None:
            continue
        out.append(ChoiceTrial(amount_ss=t.amount_ss, delay_ss=t.delay_ss or 0.0,
                               amount_ll=t.amount_ll, delay_ll=t.delay_ll or 0.0,
                               chosen=t.choice, is_control=bool(t.is_control)))
    return out
