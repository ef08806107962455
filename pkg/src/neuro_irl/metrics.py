"""Misprediction scores and Welch's two-tailed t-test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_CF_MAX_ITERS = 300
_CF_EPS = 3e-16
_TINY = 1e-300


def misprediction(learned, expert) -> float:
    """Fraction of states where the learned action differs from the expert's."""
    learned = np.asarray(learned)
    expert = np.asarray(expert)
    if learned.shape != expert.shape:
        raise ValueError(f"policy shapes differ: {learned.shape} vs {expert.shape}")
    return float(np.mean(learned != expert))


def misprediction_stochastic(action_probs, expert) -> float:
    """Expected misprediction of a stochastic policy given as (|S|, A) action probabilities."""
    action_probs = np.asarray(action_probs, dtype=np.float64)
    expert = np.asarray(expert, dtype=np.int64)
    hit = action_probs[np.arange(expert.size), expert]
    return float(1.0 - hit.sum() / expert.size)


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, _CF_MAX_ITERS + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        step = d * c
        h *= step
        if abs(step - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _ibeta(a: float, b: float, x: float, y: float) -> float:
    # y = 1 - x, passed separately so callers can supply it without cancellation
    if x == 0.0:
        return 0.0
    if y == 0.0:
        return 1.0
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log(y)
    # the fraction converges fast for x < (a + 1) / (a + b + 2); use symmetry otherwise
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, y) / b


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    return _ibeta(a, b, x, 1.0 - x)


def student_t_two_sided_p(t: float, dof: float) -> float:
    """P(|T| >= |t|) for Student's t with ``dof`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    t2 = t * t
    return _ibeta(dof / 2.0, 0.5, dof / (dof + t2), t2 / (dof + t2))


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float


def two_tailed_t_test(sample_a, sample_b) -> TTestResult:
    """Welch's unequal-variance t-test; ``t`` is positive when mean(a) > mean(b)."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two observations")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    diff = a.mean() - b.mean()
    if va + vb == 0.0:
        if diff == 0.0:
            return TTestResult(0.0, float(a.size + b.size - 2), 1.0)
        return TTestResult(math.copysign(math.inf, diff), float(a.size + b.size - 2), 0.0)
    t = diff / math.sqrt(va + vb)
    dof = (va + vb) ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    return TTestResult(float(t), float(dof), student_t_two_sided_p(t, dof))
