import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrtm.errors import DomainError, SpectralSingularityError
from lrtm.evolution import Convention, amplitudes, convert
from lrtm.phase import imag_theta_limits, phase_profile
from lrtm.solvable import (
    ExactCoulombModel,
    I0_representations,
    check_unimodular,
    coeffs_from_solutions,
    exact_transfer,
    phi_minus,
    phi_plus,
    star_constants,
)

models = st.builds(ExactCoulombModel, st.floats(-20, -0.05) | st.floats(0.05, 3),
                   st.floats(0.5, 3), st.floats(2, 30))


def test_star_constants_examples():
    assert star_constants(0.0, 2.0) == (0, 0)
    c, z = star_constants(1.0, 1.0)
    assert c == pytest.approx(0.25 + 0.125j, abs=1e-16)
    assert z == pytest.approx(-0.25 + 0.5j, abs=1e-16)
    c, _ = star_constants(-5.0, 5.0)
    assert c == pytest.approx(-0.05 + 0.025j, abs=1e-16)
    with pytest.raises(DomainError):
        star_constants(1.0, 0.0)


@given(st.floats(-50, 50), st.floats(0.1, 100))
def test_z_star_is_2ik_c_star(g, k):
    c, z = star_constants(g, k)
    assert z == 2j * k * c
    assert z == pytest.approx(g * (-g + 2j * k) / (4 * k * k), rel=1e-14, abs=1e-300)


def test_free_limit():
    em = ExactCoulombModel(0.0, 1.0, 3.0)
    assert em.c_star == 0 and em.z_star == 0
    assert em.coeffs == pytest.approx((1, 0, 0, 1), abs=1e-15)
    a = em.amplitudes
    assert (a.r_left, a.r_right, a.t) == pytest.approx((0, 0, 1), abs=1e-15)
    for x in (1.0, 2.5):
        assert phi_plus(em, x) == pytest.approx(cmath.exp(3j * x), abs=1e-15)
        assert phi_minus(em, x) == pytest.approx(cmath.exp(-3j * x), abs=1e-15)


def test_desk_values():
    em = ExactCoulombModel(-5.0, 1.0, 5.0)
    assert em.g_hat == pytest.approx(-0.05)
    rl2, _, t2 = em.amplitudes.abs2
    assert t2 == pytest.approx(1 / 1.05**2, rel=1e-13)
    assert t2 == pytest.approx(0.907029, abs=5e-7)
    assert rl2 == pytest.approx((0.05 / 1.05) ** 2, rel=1e-13)
    assert rl2 == pytest.approx(0.00226757, abs=5e-9)


def test_pole_guard():
    with pytest.raises(SpectralSingularityError):
        ExactCoulombModel(4.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        ExactCoulombModel(-1.0, 0.0, 1.0)


def test_phi_plus_at_cut():
    em = ExactCoulombModel(-5.0, 1.5, 4.0)
    assert phi_plus(em, em.a) == pytest.approx(cmath.exp(em.c_star / em.a) * cmath.exp(1j * em.k * em.a), rel=1e-15)


@given(models, st.floats(1.0, 60.0))
def test_phi_plus_solves_the_equation(em, t):
    x = em.a * t
    k, s = em.k, em.sigma
    p, dp = phi_plus(em, x, True)
    d2 = (0.5j * s / x**2 + (1j * (k - 0.5 * s / x)) ** 2) * p
    v = em.potential.value(x)
    resid = -d2 + v * p - k * k * p
    assert abs(resid) < 1e-8 * k * k * abs(p)
    assert abs(dp - 1j * (k - 0.5 * s / x) * p) == 0


@given(models, st.floats(1.0, 60.0))
def test_solvability_residual_vanishes(em, t):
    x = em.a * t
    k, c = em.k, em.c_star
    v = em.potential.value(x)
    dv = em.potential.derivative(x, 1)
    xi1, xi2 = -c / x**2, 2 * c / x**3
    q = xi2 + xi1**2 + 2j * k * (1 - v / (2 * k * k)) * xi1 - v * v / (4 * k * k) - 1j * dv / (2 * k)
    scale = abs(v) ** 2 / (4 * k * k) + abs(dv) / (2 * k) + 1e-300
    assert abs(q) < 1e-10 * scale


@pytest.mark.parametrize("g,k", [(-5.0, 5.0), (-1.0, 3.0), (2.0, 4.0)])
def test_phi_minus_wronskian_and_residual(g, k):
    em = ExactCoulombModel(g, 1.0, k)
    ws = []
    # points stay clear of the cut, where v jumps
    for x in (1.2, 1.7, 4.0, 20.0):
        p, dp = phi_plus(em, x, True)
        m, dm = phi_minus(em, x, True)
        ws.append(p * dm - m * dp)
        h = 1e-4 / k
        fd2 = (phi_minus(em, x + h, True)[1] - phi_minus(em, x - h, True)[1]) / (2 * h)
        resid = -fd2 + em.potential.value(x) * m - k * k * m
        assert abs(resid) < 1e-6 * k * k * abs(m)
    assert np.allclose(ws, -2j * k, rtol=1e-8, atol=0)


@pytest.mark.parametrize("g,k", [(-5.0, 5.0), (3.0, 2.0)])
def test_phi_asymptotics(g, k):
    em = ExactCoulombModel(g, 1.0, k)
    prof = phase_profile(em.potential, k)
    for x in (10.0, 100.0, 1000.0):
        S = prof.S(x)
        assert abs(phi_plus(em, x) * cmath.exp(-1j * S) - 1) < abs(em.c_star) / x * 1.1
        assert abs(phi_minus(em, x) * cmath.exp(1j * S) - 1) < 5 * abs(em.c_star) / x + 2 * abs(em.sigma) / (k * x)


@given(models)
def test_coefficients_are_unimodular(em):
    assert check_unimodular(em, 1e-9) < 1e-9


@pytest.mark.parametrize("g,a,k", [(-5.0, 1.0, 5.0), (-1.0, 2.0, 3.0), (1.5, 1.0, 6.0)])
def test_closed_form_coefficients_match_the_solutions(g, a, k):
    em = ExactCoulombModel(g, a, k)
    closed = np.array(em.coeffs)
    direct = np.array(coeffs_from_solutions(em))
    assert np.allclose(closed, direct, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("g,a,k", [(-5.0, 1.0, 5.0), (-5.0, 1.0, 20.0), (2.0, 1.0, 3.0)])
def test_amplitudes_through_the_general_pipeline(g, a, k):
    em = ExactCoulombModel(g, a, k)
    got = amplitudes(convert(exact_transfer(em), Convention.SCRIPT))
    assert np.allclose(got.as_tuple(), em.amplitudes.as_tuple(), rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("g,a,k", [(-5.0, 1.0, 5.0), (-1.0, 2.0, 3.0)])
def test_theta_i_equals_minus_g_hat(g, a, k):
    em = ExactCoulombModel(g, a, k)
    tip, tim = imag_theta_limits(em.potential, k)
    assert tim == 0
    assert tip == pytest.approx(-em.g_hat, abs=1e-10)
    assert em.theta_i[0] == pytest.approx(-em.g_hat, abs=1e-14)


def test_I0_representations_agree():
    r1, r2 = I0_representations(ExactCoulombModel(-5.0, 1.0, 5.0))
    assert abs(r1 - r2) <= 1e-9 * abs(r1)


def test_I0_free_case_against_brute_quadrature():
    import mpmath
    em = ExactCoulombModel(0.0, 1.0, 2.0)
    _, xint = I0_representations(em)
    y = 2 * em.a * em.k
    brute = y * complex(mpmath.quadosc(lambda x: mpmath.exp(-2j * em.k * x) / x, [em.a, mpmath.inf],
                                       omega=2 * em.k))
    assert abs(xint - brute) < 1e-10


def test_large_ak_suppression_of_the_I0_term():
    terms = []
    for k in (5.0, 10.0, 20.0, 40.0, 80.0):
        em = ExactCoulombModel(-5.0, 1.0, k)
        terms.append(abs(2j * em.g_hat * (1 - em.g_hat) * em.I0))
        assert abs(em.I0) < 2 + em.sigma**2 + 1
    assert all(b < a for a, b in zip(terms, terms[1:]))
