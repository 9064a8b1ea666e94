import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrtm.errors import DomainError
from lrtm.potential import (
    CoulombLike,
    Interval,
    SquareBarrier,
    TabulatedPotential,
    ZeroPotential,
    dissect,
    evaluate,
    load_tabulated_csv,
    truncate,
)

finite_x = st.floats(-50, 50, allow_nan=False)
couplings = st.floats(-10, 10, allow_nan=False)


def test_evaluate_examples():
    assert evaluate(ZeroPotential(), 3.7) == 0
    assert evaluate(CoulombLike(1.0, 0.0, 1.0), 2.0) == pytest.approx(0.5, abs=1e-15)
    assert evaluate(CoulombLike(1.0, 5 - 1j, 1.0), 0.5) == 0


def test_evaluate_rejects_infinite_point():
    with pytest.raises(DomainError):
        evaluate(ZeroPotential(), math.inf)


def test_coulomb_metadata():
    real = CoulombLike(-1.0, 5.0, 1.0)
    cplx = CoulombLike(-1.0, 5 - 1j, 1.0)
    assert real.decay_alpha == 1 and real.is_real and not real.is_short_range
    assert cplx.im_decay_alpha == 2 and not cplx.is_real
    pure = CoulombLike(0.0, 2.0, 1.0)
    assert pure.decay_alpha == 2 and pure.is_short_range


def test_coulomb_rejects_complex_g_and_bad_cut():
    with pytest.raises(DomainError):
        CoulombLike(1 + 1j, 0, 1)
    with pytest.raises(DomainError):
        CoulombLike(1, 0, 0)


@given(st.floats(1.0, 1e3), couplings, couplings, couplings)
def test_coulomb_derivatives_match_symbolic(x, g, zr, zi):
    z = complex(zr, zi)
    m = CoulombLike(g, z, 1.0)
    d1 = -g / x**2 - 2 * z / x**3
    d2 = 2 * g / x**3 + 6 * z / x**4
    assert abs(m.derivative(x, 1) - d1) <= 1e-12 * max(abs(d1), 1e-300) + 1e-300
    assert abs(m.derivative(x, 2) - d2) <= 1e-12 * max(abs(d2), 1e-300) + 1e-300


@pytest.mark.parametrize("model", [CoulombLike(-1.0, 5 - 1j, 1.0), SquareBarrier(2 + 1j, 0.0, 3.0)])
def test_derivatives_match_finite_differences(model):
    h = 1e-4
    for x in np.linspace(1.3, 2.7, 9):
        fd1 = (model.value(x + h) - model.value(x - h)) / (2 * h)
        fd2 = (model.value(x + h) - 2 * model.value(x) + model.value(x - h)) / h**2
        scale = max(abs(model.value(x)), 1.0)
        assert abs(model.derivative(x, 1) - fd1) <= 1e-6 * scale
        assert abs(model.derivative(x, 2) - fd2) <= 1e-6 * scale * 10


def test_tabulated_derivatives_match_finite_differences():
    x = np.linspace(0, 4, 81)
    tab = TabulatedPotential(x, np.exp(-x), 0.1 * np.sin(x))
    h = 1e-6
    for t in (0.77, 1.93, 3.11):
        fd = (tab.value(t + h) - tab.value(t - h)) / (2 * h)
        assert abs(tab.derivative(t, 1) - fd) <= 1e-6 * max(1.0, abs(fd))


def test_zero_outside_support_is_exact():
    sq = SquareBarrier(1.0, 0.0, 1.0)
    assert sq.value(-0.1) == 0 and sq.value(1.5) == 0
    arr = sq.value(np.array([-1.0, 0.5, 2.0]))
    assert arr[0] == 0 and arr[2] == 0 and arr[1] == 1


def test_truncate_examples():
    assert isinstance(truncate(ZeroPotential(), -1, 1), ZeroPotential)
    m = CoulombLike(1.0, 5 - 1j, 1.0)
    same = truncate(m, 1.0, math.inf)
    for x in (0.5, 1.0, 2.0, 40.0):
        assert same.value(x) == m.value(x)
    t = truncate(CoulombLike(1.0, 0.0, 1.0), 1, 2)
    assert t.value(1.5) == pytest.approx(2 / 3, abs=1e-15)
    assert t.value(2.5) == 0
    assert t.is_short_range and t.decay_alpha == math.inf


def test_truncate_rejects_empty_interval():
    with pytest.raises(DomainError):
        truncate(ZeroPotential(), 1, 1)


@given(st.floats(-5, 5), st.floats(0.01, 5), finite_x)
def test_truncate_idempotent(lo, width, x):
    m = CoulombLike(-2.0, 1 + 3j, 0.5)
    hi = lo + width
    once = truncate(m, lo, hi)
    twice = truncate(once, lo, hi)
    assert once.value(x) == twice.value(x)


def test_dissect_examples():
    parts = dissect(ZeroPotential(), 1.0)
    assert all(isinstance(p, ZeroPotential) for p in parts)
    m = CoulombLike(1.0, 0.0, 1.0)
    vm, v0, vp = dissect(m, 1.0)
    for x in (-3.0, -1.0, 0.0, 0.99, 1.0, 7.0):
        assert vm.value(x) == 0 and v0.value(x) == 0
        assert vp.value(x) == m.value(x)
    vm, v0, vp = dissect(m, 2.0)
    assert v0.value(1.5) == pytest.approx(2 / 3, abs=1e-15)
    assert vp.value(3.0) == pytest.approx(1 / 3, abs=1e-15)
    assert vm.value(-3.0) == 0


def test_dissect_rejects_nonpositive_cut():
    with pytest.raises(DomainError):
        dissect(ZeroPotential(), 0.0)


@given(st.floats(0.1, 5), finite_x)
def test_dissection_sums_to_original(a, x):
    m = SquareBarrier(1 - 2j, -3.0, 4.0)
    vm, v0, vp = dissect(m, a)
    assert vm.value(x) + v0.value(x) + vp.value(x) == m.value(x)


@pytest.mark.parametrize("a", [0.5, 2.0])
def test_dissection_endpoint_assignment(a):
    m = SquareBarrier(1.0, -10.0, 10.0)
    vm, v0, vp = dissect(m, a)
    assert vm.value(-a) == 1 and v0.value(-a) == 0
    assert vp.value(a) == 1 and v0.value(a) == 0


def test_interval_rejects_reversed_bounds():
    with pytest.raises(DomainError):
        Interval(2.0, 1.0)


def test_load_tabulated_csv(tmp_path):
    p = tmp_path / "v.csv"
    p.write_text("# x, re, im\n0,0,0\n1,1,0.5\n2,0,0\n")
    tab = load_tabulated_csv(p)
    assert tab.value(1.0) == pytest.approx(1 + 0.5j)
    assert tab.value(3.0) == 0
    assert not tab.is_real
