import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyborgnav.errors import DegenerateDataError
from cyborgnav.stats import f_sf, one_way_anova, pooled_t_test, t_sf, welch_t_test

A = [4.1, 5.3, 6.2, 5.8, 4.9, 7.1, 6.6, 5.0]
B = [6.9, 7.4, 8.8, 6.1, 9.0, 7.7, 8.3, 7.9, 8.5, 6.8]
C = [5.5, 6.0, 7.2, 6.4]

# reference values from an independent statistics routine, frozen
WELCH = dict(t=-4.60207859124999, p=0.0003564995565147539, df=14.813750297076691)
POOLED = dict(t=-4.626838201011616, p=0.0002798750960500699)
ANOVA = dict(F=12.03418960888562, p=0.0004203907868095125)

samples = st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=15)


def test_welch_reference():
    r = welch_t_test(A, B)
    assert r.t == pytest.approx(WELCH["t"], rel=1e-12)
    assert r.df == pytest.approx(WELCH["df"], rel=1e-12)
    assert r.p == pytest.approx(WELCH["p"], abs=1e-9)


def test_pooled_reference():
    r = pooled_t_test(A, B)
    assert r.t == pytest.approx(POOLED["t"], rel=1e-12)
    assert r.df == 16
    assert r.p == pytest.approx(POOLED["p"], abs=1e-9)


def test_anova_reference():
    r = one_way_anova([A, B, C])
    assert (r.df_between, r.df_within) == (2, 19)
    assert r.F == pytest.approx(ANOVA["F"], rel=1e-12)
    assert r.p == pytest.approx(ANOVA["p"], abs=1e-9)


def test_identical_groups():
    r = welch_t_test([1, 2, 3], [1, 2, 3])
    assert r.t == 0.0
    assert r.p == pytest.approx(1.0)
    assert one_way_anova([[1, 2, 3]] * 3).F == 0.0


@pytest.mark.parametrize("fn", [welch_t_test, pooled_t_test])
def test_degenerate(fn):
    with pytest.raises(DegenerateDataError, match="degenerate data"):
        fn([2, 2, 2], [2, 2])
    with pytest.raises(DegenerateDataError):
        fn([1.0], [1.0, 2.0])


def test_anova_needs_two_groups():
    with pytest.raises(DegenerateDataError):
        one_way_anova([A])


def test_tail_edges():
    assert t_sf(0.0, 5) == pytest.approx(1.0)
    assert t_sf(math.inf, 5) == 0.0
    assert f_sf(0.0, 2, 10) == 1.0
    assert f_sf(math.inf, 2, 10) == 0.0


def _spread(xs):
    return np.ptp(xs) > 1e-3


@settings(max_examples=100, deadline=None)
@given(samples, samples)
def test_swap_symmetry(a, b):
    if not (_spread(a) and _spread(b)):
        return
    r1, r2 = welch_t_test(a, b), welch_t_test(b, a)
    assert r1.t == pytest.approx(-r2.t, rel=1e-12, abs=1e-12)
    assert r1.p == pytest.approx(r2.p, rel=1e-9, abs=1e-15)
    assert 0.0 <= r1.p <= 1.0


@settings(max_examples=100, deadline=None)
@given(samples, samples)
def test_two_group_anova_is_pooled_t_squared(a, b):
    if not (_spread(a) and _spread(b)):
        return
    t = pooled_t_test(a, b)
    f = one_way_anova([a, b])
    assert f.F == pytest.approx(t.t ** 2, rel=1e-9, abs=1e-9)
    assert f.p == pytest.approx(t.p, rel=1e-6, abs=1e-12)
