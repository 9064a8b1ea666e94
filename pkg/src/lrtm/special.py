"""Upper incomplete gamma function on the imaginary axis.

The quantity needed is the oscillatory tail

    J(s, y) = int_y^inf t^(s-1) e^(-it) dt = exp(-i pi s / 2) Gamma(s, i y),

for ``Re s = 0`` (more generally ``Re s < 1``) and ``y > 0``. The primary
route integrates ``[y, T]`` adaptively, then integrates by parts at
``T`` until the integrand decays like ``t^(-m-1)`` and finishes with a
Fourier-weighted quadrature. The cross-check is a modified-Lentz
continued fraction for ``Gamma(s, z)`` when ``y`` is large, and
``Gamma(s) - gamma(s, z)`` with the power series of the lower function
when ``y`` is small compared with ``|s|`` (where the fraction stalls).
"""

from __future__ import annotations

import cmath
import math
import warnings

import numpy as np
from scipy import integrate
from scipy.special import gamma as _gamma

from .errors import ConsistencyError, ConvergenceError, DomainError
from .quadrature import oscillatory_integral

__all__ = ["incomplete_gamma_cf", "incomplete_gamma_series", "tail_integral", "upper_gamma_complex"]

_IBP_TERMS = 4
_CELL_ROUTE_S = 10.0


def incomplete_gamma_cf(s: complex, z: complex, eps: float = 1e-16, max_iter: int = 200_000) -> complex:
    """``Gamma(s, z)`` from Legendre's continued fraction (modified Lentz)."""
    if z == 0 or (z.imag == 0 and z.real < 0):
        raise DomainError("continued fraction needs z off the closed negative real axis")
    tiny = 1e-300
    b = z + 1 - s
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, max_iter):
        an = -i * (i - s)
        b += 2
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < eps:
            return cmath.exp(-z + s * cmath.log(z)) * h
    raise ConvergenceError("incomplete gamma continued fraction did not converge")


def incomplete_gamma_series(s: complex, z: complex, eps: float = 1e-17, max_iter: int = 100_000) -> complex:
    """``Gamma(s, z) = Gamma(s) - gamma(s, z)`` with the series of ``gamma(s, z)``."""
    if s == 0 or (s.imag == 0 and s.real <= 0 and s.real == int(s.real)):
        raise DomainError("series route needs s away from the poles of Gamma")
    term = 1 / s
    total = term
    for n in range(1, max_iter):
        term *= z / (s + n)
        total += term
        if n > abs(z) and abs(term) < eps * abs(total):
            lower = cmath.exp(-z + s * cmath.log(z)) * total
            return complex(_gamma(s)) - lower
    raise ConvergenceError("lower incomplete gamma series did not converge")


def _cross_check(s: complex, y: float) -> complex:
    if y <= 0.8 * abs(s) or (abs(s) >= 1 and y <= 6.0):
        g = incomplete_gamma_series(s, 1j * y)
    else:
        g = incomplete_gamma_cf(s, 1j * y)
    return cmath.exp(-0.5j * math.pi * s) * g


def _quad_c(f, lo, hi, **kw):
    # the requested tolerances sit at the rounding floor; QUADPACK then
    # reports roundoff, which is harmless here (verified against mpmath)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda t: f(t).real, lo, hi, **kw)[0]
        im = integrate.quad(lambda t: f(t).imag, lo, hi, **kw)[0]
    return complex(re, im)


def _fourier_tail(p: complex, T: float) -> complex:
    """``int_T^inf t^p e^{-it} dt`` for ``Re p < -1`` by QAWF."""
    def fr(t):
        return (t ** p).real

    def fi(t):
        return (t ** p).imag

    kw = dict(weight="cos", wvar=1.0, epsabs=1e-17, limlst=200)
    c_r = integrate.quad(fr, T, math.inf, **kw)[0]
    c_i = integrate.quad(fi, T, math.inf, **kw)[0]
    kw["weight"] = "sin"
    s_r = integrate.quad(fr, T, math.inf, **kw)[0]
    s_i = integrate.quad(fi, T, math.inf, **kw)[0]
    return complex(c_r + s_i, c_i - s_r)


def _cell_tail(s: complex, T: float) -> complex:
    """``J(s, T)`` by phase-cell quadrature; needs ``T > Im s`` so the phase is monotone."""
    p, q = s.real - 1.0, s.imag

    def amp(t):
        return t ** p

    def phase(t):
        return q * np.log(t) - t

    def dphase(t):
        return q / t - 1.0

    scale = T ** p
    return oscillatory_integral(amp, phase, dphase, T, tol=1e-14 * scale).value


def tail_integral(s: complex, y: float) -> complex:
    """``J(s, y)`` by quadrature plus integration by parts (primary route)."""
    s = complex(s)
    if not y > 0:
        raise DomainError("tail integral needs y > 0")
    if s.real >= 1:
        raise DomainError("tail integral diverges for Re s >= 1")
    T = max(y, 2.0 * abs(s) + 20.0)
    head = 0j
    if T > y:
        head = _quad_c(lambda t: t ** (s - 1) * cmath.exp(-1j * t), y, T,
                       epsabs=1e-15, epsrel=1e-13, limit=2000)
    if abs(s) > _CELL_ROUTE_S:
        # t^s oscillates too fast for Fourier-weighted quadrature here
        return head + _cell_tail(s, T)
    # J(s,T) = sum_j c_j T^(s-1-j) e^{-iT} + c_m J(s-m, T),
    # c_0 = -i, c_{j+1} = -i (s-1-j) c_j
    e = cmath.exp(-1j * T)
    coef = -1j
    tail = 0j
    for j in range(_IBP_TERMS):
        tail += coef * T ** (s - 1 - j) * e
        coef *= -1j * (s - 1 - j)
    tail += coef / (-1j) * _fourier_tail(s - _IBP_TERMS - 1, T)
    return head + tail


def upper_gamma_complex(s: complex, y: float, check: bool = True, rtol: float = 1e-10) -> complex:
    """``int_y^inf t^(s-1) e^(-it) dt`` with a continued-fraction cross-check.

    Raises :class:`ConsistencyError` if the routes disagree by more than
    ``1e-8`` relative; ``rtol`` is the agreement expected in normal use.
    """
    primary = tail_integral(s, y)
    if check:
        alt = _cross_check(complex(s), y)
        gap = abs(primary - alt) / max(abs(alt), 1e-300)
        if gap > 1e-8:
            raise ConsistencyError(f"incomplete gamma routes disagree (relative gap {gap:.2e})")
    return primary
