"""Exactly solvable Coulomb-like tail.

For ``v(x) = g/x + z/x**2`` on ``[a, inf)`` the Schrodinger equation has
the elementary solution ``phi_+ = exp(c/x) exp(iS(x))`` provided
``c = g(2k + ig)/8k^3`` and ``z = 2ik c``. The second solution ``phi_-``
follows by reduction of order and involves the tail integral
``int_x^inf ds / (s phi_+^2)``, an upper incomplete gamma function with
imaginary arguments. Matching at ``x = a`` gives closed forms for the
matching coefficients and for the reflection and transmission
amplitudes, which serve as the reference answer for every numerical
route in the package.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConsistencyError, DomainError, SpectralSingularityError
from .evolution import Convention, PhaseContext, ScatteringAmplitudes, TransferMatrix
from .potential import CoulombLike
from .quadrature import oscillatory_integral
from .special import _quad_c, tail_integral, upper_gamma_complex

__all__ = [
    "star_constants",
    "ExactCoulombModel",
    "phi_plus",
    "phi_minus",
    "I0",
    "I0_representations",
    "exact_coeffs",
    "exact_amplitudes",
    "exact_transfer",
    "partial_I",
]

GHAT_GUARD = 1e-10


def star_constants(g: float, k: float) -> tuple[complex, complex]:
    """``(c*, z*)`` for which ``exp(c/x) e^{iS}`` solves the equation exactly."""
    if not k > 0:
        raise DomainError("wavenumber must be positive")
    c = g * (2 * k + 1j * g) / (8 * k ** 3)
    return c, 2j * k * c


@dataclass(frozen=True)
class ExactCoulombModel:
    g: float
    a: float
    k: float

    def __post_init__(self) -> None:
        if not self.a > 0 or not self.k > 0:
            raise DomainError("need a > 0 and k > 0")
        if abs(1 - self.g_hat) <= GHAT_GUARD:
            raise SpectralSingularityError("g = 4 a k^2: the transmission amplitude has a pole")

    @property
    def c_star(self) -> complex:
        return star_constants(self.g, self.k)[0]

    @property
    def z_star(self) -> complex:
        return star_constants(self.g, self.k)[1]

    @property
    def g_hat(self) -> float:
        return self.g / (4 * self.a * self.k ** 2)

    @property
    def sigma(self) -> float:
        """``g/k``, the exponent of the logarithmic phase."""
        return self.g / self.k

    @property
    def potential(self) -> CoulombLike:
        return CoulombLike(self.g, self.z_star, self.a)

    @property
    def theta_i(self) -> tuple[float, float]:
        """``(theta_i_plus, theta_i_minus)`` of the tail."""
        return -self.z_star.imag / (2 * self.k * self.a), 0.0

    @cached_property
    def I0(self) -> complex:
        return I0(self)

    @cached_property
    def coeffs(self) -> tuple[complex, complex, complex, complex]:
        return exact_coeffs(self)

    @cached_property
    def amplitudes(self) -> ScatteringAmplitudes:
        return exact_amplitudes(self)


def phi_plus(model: ExactCoulombModel, x, derivative: bool = False):
    """``phi_+`` (and optionally ``phi_+'``) at ``x >= a``."""
    k, s, a = model.k, model.sigma, model.a
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    val = np.exp(model.c_star / a + 1j * (k * x - 0.5 * s * np.log(x / a)))
    if not derivative:
        return val
    return val, 1j * (k - 0.5 * s / x) * val


def _tail_L(model: ExactCoulombModel, x: float) -> complex:
    """``int_x^inf ds / (s phi_+(s)^2)``."""
    s = model.sigma
    if s == 0:
        return 0j
    J = upper_gamma_complex(1j * s, 2 * model.k * x)
    return cmath.exp(-2 * model.c_star / model.a) * (2 * model.a * model.k) ** (-1j * s) * J


def phi_minus(model: ExactCoulombModel, x: float, derivative: bool = False):
    """Second solution, behaving like ``e^{-iS(x)}`` as ``x -> inf``."""
    p, dp = phi_plus(model, float(x), derivative=True)
    s = model.sigma
    L = _tail_L(model, float(x))
    val = 1 / p + 1j * s * p * L
    if not derivative:
        return val
    dval = -dp / p ** 2 + 1j * s * (dp * L - 1 / (x * p))
    return val, dval


def I0_representations(model: ExactCoulombModel, tol: float = 1e-11) -> tuple[complex, complex]:
    """The two evaluations of ``I0``: incomplete gamma, and the x-integral.

    The x-integral ``2ak int_a^inf x^{-1} (x/a)^{i g/k} e^{-2ikx} dx`` is
    done by phase-cell quadrature; where the phase is not yet monotone
    (large positive ``g/k``) the first stretch uses adaptive quadrature.
    """
    k, a, s = model.k, model.a, model.sigma
    y = 2 * a * k
    via_gamma = y ** (1 - 1j * s) * tail_integral(1j * s, y)

    def amp(x):
        return y / x

    def phase(x):
        return s * np.log(x / a) - 2 * k * x

    def dphase(x):
        return s / x - 2 * k

    x1 = max(a, s / k)
    head = 0j
    if x1 > a:
        head = _quad_c(lambda t: amp(t) * cmath.exp(1j * phase(t)), a, x1,
                       limit=500, epsabs=1e-15, epsrel=1e-13)
    res = oscillatory_integral(amp, phase, dphase, x1, tol=tol)
    return via_gamma, head + res.value


def I0(model: ExactCoulombModel, check: bool = True) -> complex:
    """``I0 = (2ak)^{1 - ig/k} int_{2ak}^inf t^{-1 + ig/k} e^{-it} dt``."""
    y = 2 * model.a * model.k
    val = y ** (1 - 1j * model.sigma) * upper_gamma_complex(1j * model.sigma, y, check=check)
    return val


def partial_I(sigma: float, y: float) -> complex:
    """``int_1^y t^{-1 + i sigma} e^{-it} dt`` (the bounded helper of the tail estimate)."""
    return tail_integral(1j * sigma, 1.0) - tail_integral(1j * sigma, y)


def exact_coeffs(model: ExactCoulombModel) -> tuple[complex, complex, complex, complex]:
    """``(a_+, a_-, b_+, b_-)`` from the closed forms."""
    gh, ak = model.g_hat, model.a * model.k
    ec = cmath.exp(model.c_star / model.a)
    i0 = model.I0
    e2 = cmath.exp(2j * ak)
    a_p = (1 - gh) * ec
    a_m = (-gh / e2 + 2j * gh * (1 - gh) * i0) / ec
    b_p = gh * e2 * ec
    b_m = (1 + gh + 2j * gh * gh * e2 * i0) / ec
    return a_p, a_m, b_p, b_m


def coeffs_from_solutions(model: ExactCoulombModel) -> tuple[complex, complex, complex, complex]:
    """Matching coefficients computed directly from ``phi_+-`` at ``x = a``."""
    a, k = model.a, model.k
    p, dp = phi_plus(model, a, derivative=True)
    m, dm = phi_minus(model, a, derivative=True)
    ea = cmath.exp(1j * k * a)
    return (0.5 * (p - 1j * dp / k) / ea, 0.5 * (m - 1j * dm / k) / ea,
            0.5 * (p + 1j * dp / k) * ea, 0.5 * (m + 1j * dm / k) * ea)


def exact_transfer(model: ExactCoulombModel) -> TransferMatrix:
    """Breve transfer matrix ``[[b_-, -a_-], [-b_+, a_+]]`` of the tail."""
    a_p, a_m, b_p, b_m = model.coeffs
    th_ip, th_im = model.theta_i
    long_range = model.g != 0
    ctx = PhaseContext(None if long_range else -model.z_star / (2 * model.k * model.a),
                       0j, th_ip, th_im)
    return TransferMatrix(np.array([[b_m, -a_m], [-b_p, a_p]]), Convention.BREVE, model.k, ctx, "solvable")


def exact_amplitudes(model: ExactCoulombModel) -> ScatteringAmplitudes:
    """Intensity-normalised amplitudes ``(R^l, R^r, T)`` in closed form."""
    gh, ak = model.g_hat, model.a * model.k
    if abs(1 - gh) <= GHAT_GUARD:
        raise SpectralSingularityError("g_hat = 1")
    e2 = cmath.exp(2j * ak)
    rl = gh * e2 / (1 - gh)
    rr = cmath.exp(-4j * ak * gh * gh) * (gh / e2 / (1 - gh) - 2j * gh * model.I0)
    t = cmath.exp(-2j * ak * gh * gh) / (1 - gh)
    return ScatteringAmplitudes(rl, rr, t, Convention.SCRIPT)


def check_unimodular(model: ExactCoulombModel, tol: float = 1e-9) -> float:
    a_p, a_m, b_p, b_m = model.coeffs
    gap = abs(a_p * b_m - a_m * b_p - 1)
    if gap > tol:
        raise ConsistencyError(f"matching coefficients are not unimodular (gap {gap:.2e})")
    return gap
