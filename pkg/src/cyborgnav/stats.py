"""Two-sample t-tests and one-way ANOVA.

Test statistics are computed here; tail probabilities come from
:mod:`scipy.special`.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from .errors import DegenerateDataError

__all__ = ["TTestResult", "AnovaResult", "t_sf", "f_sf", "welch_t_test",
           "pooled_t_test", "one_way_anova"]


class TTestResult(NamedTuple):
    t: float
    df: float
    p: float


class AnovaResult(NamedTuple):
    F: float
    df_between: int
    df_within: int
    p: float


def t_sf(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= |t|) for Student's t with ``df`` dof."""
    return float(2.0 * special.stdtr(df, -abs(t)))


def f_sf(F: float, d1: float, d2: float) -> float:
    """Upper tail probability of the F(d1, d2) distribution."""
    if F <= 0:
        return 1.0
    return float(special.fdtrc(d1, d2, F))


def _as_sample(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size < 2:
        raise DegenerateDataError(f"{name} needs at least two samples")
    return arr


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom."""
    a = _as_sample(a, "a")
    b = _as_sample(b, "b")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    se2 = va + vb
    diff = a.mean() - b.mean()
    if se2 == 0.0:
        raise DegenerateDataError("degenerate data")
    t = diff / math.sqrt(se2)
    df = se2 * se2 / (va * va / (a.size - 1) + vb * vb / (b.size - 1))
    return TTestResult(float(t), float(df), t_sf(t, df))


def pooled_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Student's t-test assuming equal variances."""
    a = _as_sample(a, "a")
    b = _as_sample(b, "b")
    df = a.size + b.size - 2
    sp2 = ((a.size - 1) * a.var(ddof=1) + (b.size - 1) * b.var(ddof=1)) / df
    diff = a.mean() - b.mean()
    if sp2 == 0.0:
        raise DegenerateDataError("degenerate data")
    t = diff / math.sqrt(sp2 * (1.0 / a.size + 1.0 / b.size))
    return TTestResult(float(t), float(df), t_sf(t, df))


def one_way_anova(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """Classic one-way ANOVA F-test across ``groups``."""
    samples = [_as_sample(g, f"group {i}") for i, g in enumerate(groups)]
    k = len(samples)
    if k < 2:
        raise DegenerateDataError("ANOVA needs at least two groups")
    n = sum(s.size for s in samples)
    grand = np.concatenate(samples).mean()
    ss_between = sum(s.size * (s.mean() - grand) ** 2 for s in samples)
    ss_within = sum(((s - s.mean()) ** 2).sum() for s in samples)
    d1, d2 = k - 1, n - k
    if ss_within == 0.0:
        raise DegenerateDataError("degenerate data")
    F = (ss_between / d1) / (ss_within / d2)
    return AnovaResult(float(F), d1, d2, f_sf(F, d1, d2))
