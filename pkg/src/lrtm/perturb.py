"""Zeroth- and first-order transfer matrices of a tail potential.

The interaction-picture operator ``U(inf, a)`` is expanded in its Dyson
series. The zeroth order keeps only the background ``w``; the first
order adds the integrals

    U0 = (1/2k) int_a^inf u/tau,   U+- = (1/2k) int_a^inf (u/tau) e^{+-2iS},

assembled as ``[[U0, U-], [-U+, -U0]]``. Two equivalent first-order
forms are produced (multiplicative and additive); their gap is a free
estimate of the second-order term.

The leading Dyson term carries a factor ``-i``. ``form="corrected"``
(default) keeps it; ``form="literal"`` evaluates the same expressions without
it, for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import integrate, stats

from .decomp import SolvableDecomposition, _fast_inner, interaction_integrals, transfer_w
from .errors import DomainError
from .evolution import Convention, TransferMatrix, amplitudes, convert
from .mat2 import I2, K, SIGMA3, inv2
from .potential import ZeroPotential
from .quadrature import mixed_oscillatory_integral, oscillatory_integral

__all__ = [
    "PerturbationResult",
    "mu_nu",
    "G_matrix",
    "script_U_integrals",
    "script_U_matrix",
    "transfer_plus_perturbative",
    "dyson_term",
    "Envelope",
    "fit_envelope",
    "SlopeFit",
    "loglog_slope",
    "coefficient_gaps",
    "script_amplitudes",
]


def mu_nu(decomp: SolvableDecomposition, x):
    """``mu_+- = (1 +- tau)/(2 sqrt(tau))`` and ``nu = -v'/(8 k^3 tau^{3/2})``."""
    k = decomp.k
    tau = decomp.tau(x) + 0j
    if np.any(np.real(tau) <= 0):
        raise DomainError("tau leaves the right half plane")
    r = np.sqrt(tau)
    nu = -decomp.model.derivative(x, 1) / (8 * k ** 3 * r ** 3)
    return (1 + tau) / (2 * r), (1 - tau) / (2 * r), nu


def G_matrix(decomp: SolvableDecomposition, x: float) -> np.ndarray:
    mp, mm, nu = (complex(z) for z in mu_nu(decomp, x))
    return mp * I2 + mm * np.array([[0, 1], [1, 0]]) + 1j * nu * K


def _literal_entries(decomp: SolvableDecomposition, x):
    """``(u/2k) N(x)`` with ``N = G^{-1} e^{i s_u sigma3} K e^{-i s_u sigma3} G``."""
    k = decomp.k
    mp, mm, nu = mu_nu(decomp, x)
    g11, g12, g21, g22 = mp + 1j * nu, mm + 1j * nu, mm - 1j * nu, mp - 1j * nu
    su = -decomp.u_model.primitive(x) / (2 * k)
    e = np.exp(2j * su)
    # C = [[1, e], [-1/e, -1]];  N = adj(G) C G  (det G = 1)
    c11, c12, c21, c22 = 1.0, e, -1.0 / e, -1.0
    cg11 = c11 * g11 + c12 * g21
    cg12 = c11 * g12 + c12 * g22
    cg21 = c21 * g11 + c22 * g21
    cg22 = c21 * g12 + c22 * g22
    n11 = g22 * cg11 - g12 * cg21
    n12 = g22 * cg12 - g12 * cg22
    n21 = -g21 * cg11 + g11 * cg21
    w = decomp.u_model.value(x) / (2 * k)
    return w * n11, w * n12, w * n21


def script_U_integrals(decomp: SolvableDecomposition, tol: float = 1e-10,
                       exact_phase: bool = False) -> tuple[complex, complex, complex]:
    """``(U0, U+, U-)``.

    With ``exact_phase=True`` the factors ``exp(+-i varsigma_u)`` inside
    the first-order integrand are kept instead of being set to one.
    """
    if isinstance(decomp.u_model, ZeroPotential):
        return 0j, 0j, 0j
    if not exact_phase:
        U0, Up, Um, _ = interaction_integrals(decomp, decomp.a, tol=tol)
        return U0, Up, Um
    a, S = decomp.a, decomp.profile.S
    model, k = decomp.model, decomp.k

    def dphase(x):
        return 2 * np.real(k - model.value(x) / (2 * k))

    with np.errstate(all="ignore"):
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            f0 = lambda t: complex(_literal_entries(decomp, t)[0])  # noqa: E731
            re = integrate.quad(lambda t: f0(t).real, a, math.inf, limit=400, epsabs=1e-15, epsrel=1e-12)[0]
            im = integrate.quad(lambda t: f0(t).imag, a, math.inf, limit=400, epsabs=1e-15, epsrel=1e-12)[0]
    U0 = complex(re, im)

    def amp_m(x):
        return _literal_entries(decomp, x)[1] * np.exp(2 * np.imag(S(x)))

    def amp_p(x):
        return -_literal_entries(decomp, x)[2] * np.exp(-2 * np.imag(S(x)))

    Um = oscillatory_integral(amp_m, lambda x: -2 * np.real(S(x)), lambda x: -dphase(x), a, tol=tol).value
    Up = oscillatory_integral(amp_p, lambda x: 2 * np.real(S(x)), dphase, a, tol=tol).value
    return U0, Up, Um


def script_U_matrix(U0: complex, Up: complex, Um: complex) -> np.ndarray:
    return np.array([[U0, Um], [-Up, -U0]], dtype=complex)


@dataclass(frozen=True)
class PerturbationResult:
    order: int
    form: str
    U0: complex
    Uplus: complex
    Uminus: complex
    M0: TransferMatrix
    M1: np.ndarray
    M_approx: TransferMatrix
    M_multiplicative: TransferMatrix | None
    second_order_gap: float

    @property
    def U(self) -> np.ndarray:
        return script_U_matrix(self.U0, self.Uplus, self.Uminus)


def transfer_plus_perturbative(decomp: SolvableDecomposition, order: int = 1, form: str = "corrected",
                               exact_phase: bool = False, tol: float = 1e-10) -> PerturbationResult:
    """Perturbative breve transfer matrix of ``v_+``.

    ``order=0`` returns the background matrix ``M_w``. ``order=1`` returns
    ``M_w + M1`` with ``M1 = -i[U + varsigma_u(inf) sigma3] M_w``; the
    multiplicative form ``(I - iU) G_w(a)^{-1}`` is returned alongside.
    """
    if order not in (0, 1):
        raise DomainError("order must be 0 or 1")
    if form not in ("corrected", "literal"):
        raise DomainError("form must be 'corrected' or 'literal'")
    Mw = transfer_w(decomp)
    ctx, k = decomp.phase_context, decomp.k
    M0 = TransferMatrix(Mw.matrix, Convention.BREVE, k, ctx, "perturbative")
    if order == 0:
        return PerturbationResult(0, form, 0j, 0j, 0j, M0, np.zeros((2, 2), complex), M0, None, 0.0)
    U0, Up, Um = script_U_integrals(decomp, tol=tol, exact_phase=exact_phase)
    U = script_U_matrix(U0, Up, Um)
    su = decomp.varsigma_u_inf
    Ginv = inv2(decomp.G_w_at_a)
    if form == "corrected":
        M1 = -1j * (U + su * SIGMA3) @ Mw.matrix
        mult = (I2 - 1j * U) @ Ginv
    else:
        M1 = (U - 1j * su * SIGMA3) @ Mw.matrix
        mult = (I2 + U) @ Ginv
    add = TransferMatrix(Mw.matrix + M1, Convention.BREVE, k, ctx, "perturbative")
    mul = TransferMatrix(mult, Convention.BREVE, k, ctx, "perturbative")
    gap = float(np.max(np.abs(add.matrix - mul.matrix)))
    return PerturbationResult(1, form, U0, Up, Um, M0, M1, add, mul, gap)


# -- Dyson terms --------------------------------------------------------------

def _inner_vec(decomp: SolvableDecomposition, x):
    """``(u/2k) e^{-iS sigma3} G^{-1} K G e^{iS sigma3}`` with ``G^{-1} K G`` multiplied out."""
    k = decomp.k
    mp, mm, nu = mu_nu(decomp, x)
    g11, g12, g21, g22 = mp + 1j * nu, mm + 1j * nu, mm - 1j * nu, mp - 1j * nu
    # K G = [[g11 + g21, g12 + g22], [-(g11 + g21), -(g12 + g22)]]
    s1, s2 = g11 + g21, g12 + g22
    n11 = g22 * s1 + g12 * s1
    n12 = g22 * s2 + g12 * s2
    n21 = -g21 * s1 - g11 * s1
    n22 = -g21 * s2 - g11 * s2
    e = np.exp(2j * decomp.profile.S(x))
    w = decomp.u_model.value(x) / (2 * k)
    return w * n11, w * n12 / e, w * n21 * e, w * n22


def dyson_term(decomp: SolvableDecomposition, ell: int, tol: float = 1e-10,
               max_window: float = 1e5) -> np.ndarray:
    """``U^(ell) = int_{a<x1<..<x_ell} H(x_ell) ... H(x1)`` for ``ell`` in {1, 2}.

    ``ell = 1`` integrates each entry of ``H`` (built from ``G^{-1} K G``
    multiplied out, not from the simplified ``K/tau`` form) by phase-cell
    quadrature with Richardson extrapolation. ``ell = 2`` integrates
    ``Y1' = H, Y2' = H Y1`` up to ``X`` and closes the tail with
    ``Y2 + (U^(1) - Y1(X)) Y1(X)``, doubling ``X`` until settled.
    """
    if ell not in (1, 2):
        raise DomainError("only ell = 1 and ell = 2 are supported")
    if isinstance(decomp.u_model, ZeroPotential):
        return np.zeros((2, 2), dtype=complex)
    G = decomp.G_w_at_a
    Ginv = inv2(G)
    k, a = decomp.k, decomp.a
    model, S = decomp.model, decomp.profile.S
    decay = decomp.u_model.decay_alpha
    decay = 2.0 if not math.isfinite(decay) else decay

    def phase(x):
        return 2 * np.real(S(x))

    def dphase(x):
        return 2 * np.real(k - model.value(x) / (2 * k))

    def entry(i, j):
        def f(x):
            n = _inner_vec(decomp, x)
            inner = ((n[0], n[1]), (n[2], n[3]))
            return sum(G[i, p] * inner[p][q] * Ginv[q, j] for p in range(2) for q in range(2))
        return mixed_oscillatory_integral(f, phase, dphase, a, decay, tol=tol).value

    U1 = np.array([[entry(i, j) for j in range(2)] for i in range(2)], dtype=complex)
    if ell == 1:
        return U1

    Hin = _fast_inner(decomp)

    def rhs(x, y):
        h11, h12, h21, h22 = Hin(x)
        y1 = y[:4]
        y2 = y[4:]
        d1 = [h11, h12, h21, h22]
        d2 = [h11 * y1[0] + h12 * y1[2], h11 * y1[1] + h12 * y1[3],
              h21 * y1[0] + h22 * y1[2], h21 * y1[1] + h22 * y1[3]]
        return np.array(d1 + d2, dtype=complex)

    # inner-picture Dyson terms W1, W2 relate to H-picture ones by G (.) G^{-1}
    W1_inf = Ginv @ U1 @ G
    y = np.zeros(8, dtype=complex)
    X0, X = a, max(8 * a, a + 32 * math.pi / k)
    prev = None
    while True:
        sol = integrate.solve_ivp(rhs, (X0, X), y, method="DOP853", rtol=tol, atol=tol * 1e-3,
                                  max_step=2 * math.pi / k)
        if not sol.success:
            raise DomainError(f"Dyson integration failed: {sol.message}")
        y = sol.y[:, -1]
        Y1 = y[:4].reshape(2, 2)
        Y2 = y[4:].reshape(2, 2)
        W2 = Y2 + (W1_inf - Y1) @ Y1
        cur = G @ W2 @ Ginv
        if prev is not None and np.max(np.abs(cur - prev)) < 10 * tol:
            return cur
        if 2 * X > max_window:
            raise DomainError("Dyson tail did not settle within the maximal window")
        prev = cur
        X0, X = X, 2 * X


# -- envelope constants and fits ------------------------------------------------

class Envelope(NamedTuple):
    """Constants of ``|u| <= gamma k^{1-delta} x^{-(1+delta)}`` and ``|H_ij| <= beta |u|/k``."""

    beta: float
    gamma: float
    delta: float

    def u_integral_bound(self, a: float, k: float) -> float:
        return self.gamma * k / (self.delta * (a * k) ** self.delta)

    def dyson_bound(self, ell: int, a: float, k: float) -> float:
        return (2 * self.beta * self.gamma / (self.delta * (k * a) ** self.delta)) ** ell / math.factorial(ell)


def fit_envelope(decomp: SolvableDecomposition, span: float = 1e3, points: int = 200) -> Envelope:
    """Fit ``delta`` from the log-log slope of ``|u|`` on ``[a, span a]``; ``gamma``, ``beta`` as sup ratios."""
    a, k = decomp.a, decomp.k
    x = np.geomspace(a, span * a, points)
    u = np.abs(decomp.u_model.value(x))
    keep = u > 0
    if keep.sum() < 3:
        raise DomainError("u vanishes on the fitting window")
    fit = loglog_slope(x[keep], u[keep])
    delta = -fit.slope - 1
    if not delta > 0:
        raise DomainError("u does not decay faster than 1/x on the fitting window")
    gamma = float(np.max(u[keep] * x[keep] ** (1 + delta))) / k ** (1 - delta)
    G = decomp.G_w_at_a
    Ginv = inv2(G)
    n = _inner_vec(decomp, x)
    Hs = np.einsum("ip,npq,qj->nij", G, np.stack([np.stack([n[0], n[1]], -1), np.stack([n[2], n[3]], -1)], 1), Ginv)
    beta = float(np.max(np.abs(Hs[keep]) * k / u[keep, None, None]))
    return Envelope(beta, gamma, float(delta))


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    n: int


def loglog_slope(x: Sequence[float], y: Sequence[float], confidence: float = 0.95) -> SlopeFit:
    """Least-squares slope of ``log y`` against ``log x`` with a t-based confidence interval."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    n = lx.size
    if n < 2:
        raise DomainError("a slope fit needs at least two points")
    mx, my = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    if sxx == 0:
        raise DomainError("degenerate abscissae")
    slope = float(np.sum((lx - mx) * (ly - my)) / sxx)
    intercept = float(my - slope * mx)
    if n > 2:
        resid = ly - (intercept + slope * lx)
        stderr = math.sqrt(float(np.sum(resid ** 2)) / (n - 2) / sxx)
        half = float(stats.t.ppf(0.5 + confidence / 2, n - 2)) * stderr
    else:
        stderr, half = 0.0, 0.0
    return SlopeFit(slope, intercept, stderr, slope - half, slope + half, n)


def coefficient_gaps(first, second) -> np.ndarray:
    """Relative gaps of ``(|R^l|^2, |R^r|^2, |T|^2)`` between two amplitude sets (second is the reference)."""
    p = np.array(first.abs2)
    q = np.array(second.abs2)
    scale = np.where(q > 0, q, 1.0)
    return np.abs(p - q) / scale


def script_amplitudes(tm: TransferMatrix):
    """Intensity-normalised amplitudes of a breve transfer matrix of ``v_+``."""
    return amplitudes(convert(tm, Convention.SCRIPT))
