"""WKB phase of a potential.

For a wavenumber ``k`` the phase correction is
``varsigma(x) = -(1/2k) * int_0^x v``, the full phase is
``S(x) = k x + varsigma(x)`` and ``V(x) = 2k varsigma(x) / x``.  The limits
of ``varsigma`` at both infinities (``theta_plus``, ``theta_minus``) exist
only for short-range potentials, whereas the limits of its imaginary part
(``theta_i_plus``, ``theta_i_minus``) exist whenever ``Im v`` is
short-range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DomainError, LongRangeError
from .potential import Potential

__all__ = [
    "varsigma",
    "S_of",
    "V_of",
    "ThetaLimits",
    "theta_limits",
    "imag_theta_limits",
    "PhaseProfile",
    "phase_profile",
]


def _check_k(k: float) -> float:
    k = float(k)
    if not k > 0:
        raise DomainError(f"wavenumber must be positive, got {k}")
    return k


def varsigma(model: Potential, k: float, x):
    """Phase correction ``-(1/2k) int_0^x v``; vectorised over ``x``."""
    k = _check_k(k)
    return -model.primitive(x) / (2.0 * k)


def S_of(model: Potential, k: float, x):
    k = _check_k(k)
    return k * x + varsigma(model, k, x)


def V_of(model: Potential, k: float, x: float) -> complex:
    k = _check_k(k)
    if x == 0:
        raise DomainError("V is undefined at x = 0")
    return 2.0 * k * varsigma(model, k, x) / x


def _extrapolate(prim, x0: float, side: int, alpha: float, tol: float,
                 max_doublings: int = 60) -> tuple[complex, float]:
    """Limit of ``prim(side*x)`` as ``x -> inf`` from a doubling sequence.

    The residual is modelled as ``sum_j c_j x**(1-alpha-j)`` and removed by
    a Richardson table along ``x_n = x0 * 2**n``.
    """
    p0 = alpha - 1.0 if math.isfinite(alpha) else 1.0
    rows: list[list[complex]] = []
    prev_best = None
    x = x0
    for n in range(max_doublings):
        row = [complex(prim(side * x))]
        for j, prev in enumerate(rows[-1] if rows else []):
            if j >= 4:
                break
            r = 2.0 ** (-(p0 + j))
            row.append((row[j] - r * prev) / (1.0 - r))
        rows.append(row)
        best = row[-1]
        if prev_best is not None and n >= 3:
            err = abs(best - prev_best)
            if err < tol:
                return best, err
        prev_best = best
        x *= 2.0
    raise ConvergenceError("phase-limit extrapolation stalled")


class ThetaLimits(NamedTuple):
    plus: complex
    minus: complex
    i_plus: float
    i_minus: float


def _side_limit(model: Potential, side: int, tol: float, imag: bool):
    closed = model.imag_primitive_limit(side) if imag else model.primitive_limit(side)
    if closed is not None:
        return closed, 0.0
    sup = model.support
    edges = [abs(e) for e in (sup.lo, sup.hi) if math.isfinite(e)]
    x0 = max([1.0] + edges)
    alpha = model.im_decay_alpha if imag else model.decay_alpha
    prim = (lambda t: complex(model.primitive(t)).imag) if imag else model.primitive
    val, err = _extrapolate(prim, x0, side, alpha, tol)
    return (val.real if imag else val), err


def theta_limits(model: Potential, k: float, tol: float = 1e-10) -> ThetaLimits:
    """All four phase limits; raises LongRangeError for long-range models."""
    k = _check_k(k)
    p_plus, _ = _side_limit(model, +1, tol, imag=False)
    p_minus, _ = _side_limit(model, -1, tol, imag=False)
    th_p = -p_plus / (2 * k)
    th_m = -p_minus / (2 * k)
    return ThetaLimits(th_p, th_m, th_p.imag, th_m.imag)


def imag_theta_limits(model: Potential, k: float, tol: float = 1e-10) -> tuple[float, float]:
    """``(theta_i_plus, theta_i_minus)``; needs only ``Im v`` to be short-range."""
    k = _check_k(k)
    q_plus, _ = _side_limit(model, +1, tol, imag=True)
    q_minus, _ = _side_limit(model, -1, tol, imag=True)
    return -q_plus / (2 * k), -q_minus / (2 * k)


@dataclass(frozen=True)
class PhaseProfile:
    """Phase data of one (potential, wavenumber) pair.

    Limits that do not exist are stored as ``None``.
    """

    model: Potential
    k: float
    theta_plus: complex | None
    theta_minus: complex | None
    theta_i_plus: float | None
    theta_i_minus: float | None

    def varsigma(self, x):
        return -self.model.primitive(x) / (2.0 * self.k)

    def S(self, x):
        return self.k * x + self.varsigma(x)

    def dS(self, x):
        """``S'(x) = k - v(x)/2k``."""
        return self.k - self.model.value(x) / (2.0 * self.k)

    def V(self, x: float) -> complex:
        return V_of(self.model, self.k, x)

    @property
    def theta_r_plus(self) -> float | None:
        return None if self.theta_plus is None else self.theta_plus.real

    @property
    def theta_r_minus(self) -> float | None:
        return None if self.theta_minus is None else self.theta_minus.real


def phase_profile(model: Potential, k: float, tol: float = 1e-10) -> PhaseProfile:
    """Build a :class:`PhaseProfile`, computing whichever limits exist."""
    k = _check_k(k)
    limits: list = []
    for side in (+1, -1):
        try:
            p, _ = _side_limit(model, side, tol, imag=False)
            limits.append(-p / (2 * k))
        except LongRangeError:
            limits.append(None)
    ilimits: list = []
    for side, full in zip((+1, -1), limits):
        if full is not None:
            ilimits.append(full.imag)
            continue
        try:
            q, _ = _side_limit(model, side, tol, imag=True)
            ilimits.append(-q / (2 * k))
        except LongRangeError:
            ilimits.append(None)
    return PhaseProfile(model, k, limits[0], limits[1], ilimits[0], ilimits[1])
