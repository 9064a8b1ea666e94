"""Solvable-background decomposition of a tail potential.

On ``[a, inf)`` a long-range potential ``v`` is split as ``v = u + w``.
The background ``w`` is chosen so that the WKB pair
``f_+- = exp(+-iS) / sqrt(tau)``, ``tau = 1 - v/2k^2``, solves its
Schrodinger equation exactly; the remainder ``u`` decays one power
faster than ``v`` and is short-range. In the interaction picture with
respect to ``w`` the tail's transfer matrix factorises as
``M_+ = G_w(a)^{-1} U(inf, a)`` with ``U`` generated by a Hamiltonian
proportional to ``u``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.linalg import expm

from .errors import ConsistencyError, ConvergenceError, DomainError
from .evolution import Convention, PhaseContext, TransferMatrix, propagate
from .mat2 import I2, K, inv2
from .phase import PhaseProfile, phase_profile, theta_limits
from .potential import INF, CallablePotential, CoulombLike, Interval, Potential, ZeroPotential
from .quadrature import oscillatory_integral

__all__ = [
    "SolvableDecomposition",
    "decompose",
    "select_a0",
    "background_u",
    "wkb_pair",
    "matching_coeffs",
    "transfer_w",
    "effective_hamiltonian",
    "interaction_integrals",
    "transfer_plus_exact",
]

DEFAULT_EPSILON = 0.5


def _analytic(model: Potential) -> bool:
    return bool(model.has_analytic_derivatives)


def _tau(model: Potential, k: float, x):
    return 1.0 - model.value(x) / (2.0 * k * k)


def _admissible(tau, epsilon: float):
    return (np.abs(tau) >= epsilon) & (np.real(tau) > 0)


def select_a0(model: Potential, k: float, epsilon: float = DEFAULT_EPSILON,
              floor: float = 0.0, cap: float = 1e8, points: int = 4000) -> float:
    """Smallest cut ``a0`` with ``|1 - v/2k^2| >= epsilon`` on ``[a0, inf)``.

    The condition is checked on a geometric grid from the start of the
    support to ``cap`` and the last failing cell is refined by bisection.
    Beyond ``cap`` the decaying envelope guarantees the condition once it
    holds with margin at ``cap``. ``Re tau > 0`` is required as well so
    that the principal square root of ``tau`` is continuous.
    """
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    if not k > 0:
        raise DomainError("wavenumber must be positive")
    sup = model.support
    if sup is None:
        return floor
    start = max(floor, sup.lo)
    if start <= 0:
        start = max(floor, 1e-6)
    if not math.isfinite(sup.hi):
        end = cap
    else:
        end = max(sup.hi, start * (1 + 1e-12))
    xs = np.geomspace(start, end, points)
    ok = _admissible(_tau(model, k, xs), epsilon)
    if not math.isfinite(sup.hi) and abs(model.value(cap)) / (2 * k * k) > 1 - epsilon:
        raise DomainError(f"no admissible cut below {cap:g}: the potential is still too strong there")
    if ok.all():
        return float(start)
    j = int(np.nonzero(~ok)[0][-1])
    if j == len(xs) - 1:
        raise DomainError(f"no admissible cut below {cap:g}")
    lo, hi = xs[j], xs[j + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _admissible(_tau(model, k, mid), epsilon):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-13 * hi:
            break
    return float(hi)


def _u_parts(model: Potential, k: float, x):
    v = model.value(x)
    d1 = model.derivative(x, 1)
    d2 = model.derivative(x, 2)
    tau = 1.0 - v / (2 * k * k)
    return v, d1, d2, tau


def background_u(model: Potential, k: float, a: float, epsilon: float = DEFAULT_EPSILON) -> Potential:
    """``u = (1/4k^2)[v^2 - 3v'^2/(4k^2 tau^2) - v''/tau]`` on ``[a, inf)``, zero below."""
    if not _analytic(model):
        raise DomainError("the decomposition needs analytic first and second derivatives")
    vp = model.restrict(Interval(a, INF, True, False))
    if isinstance(vp, ZeroPotential):
        return vp
    grid = np.geomspace(a, a * 1e4, 400)
    if np.min(np.abs(_tau(vp, k, grid))) < epsilon:
        raise DomainError("|1 - v/2k^2| falls below epsilon on [a, inf): choose a larger cut")
    kk = k * k

    def u(x):
        v, d1, d2, tau = _u_parts(vp, k, x)
        return (v * v - 3 * d1 * d1 / (4 * kk * tau * tau) - d2 / tau) / (4 * kk)

    alpha = vp.decay_alpha
    alpha_u = min(2 * alpha, alpha + 2)
    im_alpha = None
    if not vp.is_real:
        ai = vp.im_decay_alpha
        im_alpha = min(alpha + ai, ai + 2)
    # u is smooth and non-oscillating, so a panel antiderivative is cheap and exact to rounding
    anti = _Antiderivative(u, a)
    return CallablePotential(u, vp.support, alpha_u, im_alpha, vp.is_real, label="u", prim=anti)


class _Antiderivative:
    """``int_a^x f`` from Gauss-Legendre panels on a geometric grid (cached cumulative sums)."""

    def __init__(self, f, a: float, span: float = 1e6, ratio: float = 1.05, nq: int = 20):
        self.f, self.a = f, a
        n = int(math.ceil(math.log(span) / math.log(ratio)))
        self.edges = a * ratio ** np.arange(n + 1)
        self.xg, self.wg = np.polynomial.legendre.leggauss(nq)
        lo, hi = self.edges[:-1], self.edges[1:]
        self.cum = np.concatenate(([0j], np.cumsum(self._panels(lo, hi))))

    def _panels(self, lo, hi):
        half = 0.5 * (hi - lo)
        x = 0.5 * (hi + lo)[:, None] + half[:, None] * self.xg[None, :]
        return np.sum(self.f(x) * self.wg[None, :], axis=1) * half

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(xa.shape, dtype=complex)
        inside = (xa > self.a) & (xa <= self.edges[-1])
        if np.any(inside):
            xi = xa[inside]
            j = np.clip(np.searchsorted(self.edges, xi, side="right") - 1, 0, len(self.edges) - 2)
            out[inside] = self.cum[j] + self._panels(self.edges[j], xi)
        for i in np.nonzero(xa > self.edges[-1])[0]:
            extra, _ = _quiet_quad(self.f, self.edges[-1], float(xa[i]))
            out[i] = self.cum[-1] + extra
        return complex(out[0]) if scalar else out


def _w_from(vp: Potential, u: Potential) -> Potential:
    """``w = v_+ - u``; its derivatives (only needed for ODE tail matching) use 5-point stencils."""
    def w(x):
        return vp.value(x) - u.value(x)

    def step(x):
        return 1e-3 * np.maximum(1.0, np.abs(x))

    def d1(x):
        h = step(x)
        return (w(x - 2 * h) - 8 * w(x - h) + 8 * w(x + h) - w(x + 2 * h)) / (12 * h)

    def d2(x):
        h = step(x)
        return (-w(x - 2 * h) + 16 * w(x - h) - 30 * w(x) + 16 * w(x + h) - w(x + 2 * h)) / (12 * h * h)

    def prim(x):
        return vp.primitive(x) - u.primitive(x)

    return CallablePotential(w, vp.support, vp.decay_alpha, None if vp.is_real else vp.im_decay_alpha,
                             vp.is_real, d1=d1, d2=d2, label="w", prim=prim)


@dataclass(frozen=True, eq=False)
class SolvableDecomposition:
    """All data of the split ``v_+ = u + w`` at one wavenumber and cut."""

    model: Potential
    k: float
    a: float
    epsilon: float
    a0: float
    u_model: Potential
    w_model: Potential
    profile: PhaseProfile
    coeffs: tuple[complex, complex, complex, complex] = field(default=(1, 0, 0, 1))
    varsigma_u_inf: complex = 0j

    def tau(self, x):
        return _tau(self.model, self.k, x)

    def S(self, x):
        return self.profile.S(x)

    @property
    def G_w_at_a(self) -> np.ndarray:
        ap, am, bp, bm = self.coeffs
        return np.array([[ap, am], [bp, bm]], dtype=complex)

    @property
    def phase_context(self) -> PhaseContext:
        """Phase limits of ``v_+`` (``theta_minus`` vanishes since ``v_+ = 0`` for ``x < a``)."""
        return PhaseContext(self.profile.theta_plus, 0j, self.profile.theta_i_plus, 0.0)

    def f_plus(self, x):
        f, _, df, _ = wkb_pair(self, x)
        return f, df

    def f_minus(self, x):
        _, f, _, df = wkb_pair(self, x)
        return f, df


def wkb_pair(decomp: SolvableDecomposition, x):
    """``(f_+, f_-, f_+', f_-')`` at ``x >= a``."""
    k = decomp.k
    xa = np.asarray(x, dtype=float)
    if np.any(xa < decomp.a):
        raise DomainError("the WKB pair is defined for x >= a only")
    v = decomp.model.value(x)
    d1 = decomp.model.derivative(x, 1)
    tau = 1.0 - v / (2 * k * k)
    if np.any(np.real(tau) <= 0):
        raise DomainError("tau leaves the right half plane: the square-root branch is ambiguous")
    r = np.sqrt(tau + 0j)
    S = decomp.profile.S(x)
    ep, em = np.exp(1j * S), np.exp(-1j * S)
    drift = d1 / (4 * k * k * r ** 3)
    fp, fm = ep / r, em / r
    return fp, fm, ep * (1j * k * r + drift), em * (-1j * k * r + drift)


def matching_coeffs(decomp: SolvableDecomposition, check_tol: float = 1e-8) -> tuple[complex, complex, complex, complex]:
    """``(a_+, a_-, b_+, b_-)``: plane-wave components of ``f_+-`` at ``x = a``."""
    a, k = decomp.a, decomp.k
    fp, fm, dfp, dfm = (complex(z) for z in wkb_pair(decomp, a))
    e = cmath.exp(1j * k * a)
    ap = 0.5 * (fp - 1j * dfp / k) / e
    am = 0.5 * (fm - 1j * dfm / k) / e
    bp = 0.5 * (fp + 1j * dfp / k) * e
    bm = 0.5 * (fm + 1j * dfm / k) * e
    gap = abs(ap * bm - am * bp - 1)
    if gap > check_tol:
        raise ConsistencyError(f"a+ b- - a- b+ deviates from 1 by {gap:.2e}")
    return ap, am, bp, bm


def decompose(model: Potential, k: float, a: float | None = None,
              epsilon: float = DEFAULT_EPSILON, tol: float = 1e-12) -> SolvableDecomposition:
    """Build the decomposition of the tail of ``model`` beyond the cut ``a``.

    ``a`` defaults to the smallest admissible cut. Raises DomainError if
    ``a`` is below it or the model lacks analytic derivatives.
    """
    if not k > 0:
        raise DomainError("wavenumber must be positive")
    if not _analytic(model):
        raise DomainError("the decomposition needs analytic first and second derivatives")
    a0 = select_a0(model, k, epsilon)
    if a is None:
        a = a0 if a0 > 0 else 1.0
    if a < a0 * (1 - 1e-12) or a <= 0:
        raise DomainError(f"cut a = {a} is below the admissible a0 = {a0}")
    vp = model.restrict(Interval(a, INF, True, False))
    u = background_u(vp, k, a, epsilon)
    w = _w_from(vp, u)
    profile = phase_profile(vp, k)
    draft = SolvableDecomposition(vp, k, a, epsilon, a0, u, w, profile)
    coeffs = matching_coeffs(draft)
    s_u = 0j if isinstance(u, ZeroPotential) else complex(theta_limits(u, k, tol).plus)
    return SolvableDecomposition(vp, k, a, epsilon, a0, u, w, profile, coeffs, s_u)


def transfer_w(decomp: SolvableDecomposition) -> TransferMatrix:
    """Closed-form breve transfer matrix of the background ``w``.

    Tagged with the phase limits of ``v_+`` so that it can stand in as
    the zeroth-order approximation of ``M_+``.
    """
    ap, am, bp, bm = decomp.coeffs
    e = cmath.exp(1j * decomp.varsigma_u_inf)
    m = np.array([[bm * e, -am * e], [-bp / e, ap / e]], dtype=complex)
    return TransferMatrix(m, Convention.BREVE, decomp.k, decomp.phase_context, "closed-form")


def _G(decomp: SolvableDecomposition, x):
    """``G(x) = mu_+ I + mu_- sigma1 + i nu K``."""
    k = decomp.k
    v = decomp.model.value(x)
    d1 = decomp.model.derivative(x, 1)
    tau = 1.0 - v / (2 * k * k)
    r = cmath.sqrt(tau)
    mp, mm = (1 + tau) / (2 * r), (1 - tau) / (2 * r)
    nu = -d1 / (8 * k ** 3 * r ** 3)
    return np.array([[mp + 1j * nu, mm + 1j * nu], [mm - 1j * nu, mp - 1j * nu]], dtype=complex)


def interaction_propagator(decomp: SolvableDecomposition, x: float) -> np.ndarray:
    """Closed-form evolution operator of ``w`` from ``a`` to ``x`` (plane-wave picture).

    Its columns at ``x`` are the plane-wave components of ``f_+-``, so
    ``U_w(x, a) = e^{-ikx sigma3} G(x) e^{iS sigma3} G_w(a)^{-1}``.
    """
    k = decomp.k
    S = complex(decomp.S(x))
    left = np.diag([cmath.exp(-1j * k * x), cmath.exp(1j * k * x)])
    right = np.diag([cmath.exp(1j * S), cmath.exp(-1j * S)])
    return left @ _G(decomp, x) @ right @ inv2(decomp.G_w_at_a)


def effective_hamiltonian(decomp: SolvableDecomposition, x: float, factorized: bool = False) -> np.ndarray:
    """``H(x) = U_w(x,a)^{-1} H_u(x) U_w(x,a)`` with the closed-form ``U_w``.

    ``factorized=True`` returns the simplified form
    ``G_w(a) (u/2k tau) e^{-iS sigma3} K e^{iS sigma3} G_w(a)^{-1}``,
    which agrees with the similarity transform identically.
    """
    if x < decomp.a:
        raise DomainError("the interaction Hamiltonian lives on x >= a")
    k = decomp.k
    u = complex(decomp.u_model.value(x))
    if u == 0:
        return np.zeros((2, 2), dtype=complex)
    if factorized:
        c = u / (2 * k * complex(decomp.tau(x)))
        e = cmath.exp(2j * complex(decomp.S(x)))
        inner = np.array([[c, c / e], [-c * e, -c]])
        G = decomp.G_w_at_a
        return G @ inner @ inv2(G)
    e = cmath.exp(2j * k * x)
    Hu = (u / (2 * k)) * np.array([[1, 1 / e], [-e, -1]])
    Uw = interaction_propagator(decomp, x)
    return inv2(Uw) @ Hu @ Uw


def _fast_inner(decomp: SolvableDecomposition):
    """Tuple-valued ``(u/2k tau) e^{-iS sigma3} K e^{iS sigma3}`` for the integrator."""
    model, k = decomp.model, decomp.k
    uval = decomp.u_model.value
    S = decomp.profile.S
    inv2k = 1.0 / (2 * k)
    kk2 = 2 * k * k

    def H(x: float):
        u = uval(x)
        if u == 0:
            return 0j, 0j, 0j, 0j
        c = u * inv2k / (1.0 - model.value(x) / kk2)
        e = cmath.exp(2j * complex(S(x)))
        return c, c / e, -c * e, -c

    return H


def _quiet_quad(f, lo, hi):
    with np.errstate(all="ignore"):
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            re, e1 = integrate.quad(lambda t: complex(f(t)).real, lo, hi, limit=400, epsabs=1e-15, epsrel=1e-12)
            im, e2 = integrate.quad(lambda t: complex(f(t)).imag, lo, hi, limit=400, epsabs=1e-15, epsrel=1e-12)
    return complex(re, im), e1 + e2


def interaction_integrals(decomp: SolvableDecomposition, X: float, tol: float = 1e-12):
    """``(1/2k) int_X^inf (u/tau) [1, e^{2iS}, e^{-2iS}] dx`` as ``(I0, I+, I-, err)``.

    The non-oscillating integral is adaptive; the two oscillating ones use
    phase cells of ``2 Re S`` (the factor ``exp(-+2 Im S)`` rides in the
    amplitude). Each is absolutely accurate to about ``tol``.
    """
    k = decomp.k
    if isinstance(decomp.u_model, ZeroPotential):
        return 0j, 0j, 0j, 0.0
    model, u, S = decomp.model, decomp.u_model, decomp.profile.S

    def base(x):
        return u.value(x) / (2 * k * (1.0 - model.value(x) / (2 * k * k)))

    I0, e0 = _quiet_quad(base, X, math.inf)

    def dphase(x):
        return 2 * np.real(k - model.value(x) / (2 * k))

    out = []
    err = e0
    for sgn in (+1, -1):
        def amp(x, sgn=sgn):
            return base(x) * np.exp(-sgn * 2 * np.imag(S(x)))

        res = oscillatory_integral(amp, lambda x, sgn=sgn: sgn * 2 * np.real(S(x)),
                                   lambda x, sgn=sgn: sgn * dphase(x), X, tol=tol)
        out.append(res.value)
        err += res.error
    return I0, out[0], out[1], err


def transfer_plus_exact(decomp: SolvableDecomposition, tol: float = 1e-10,
                        tail_tol: float | None = None, max_window: float = 1e6) -> TransferMatrix:
    """``M_+ = G_w(a)^{-1} U(inf, a)``.

    ``U`` is integrated in the interaction picture up to ``X``; the rest
    is a first-order Magnus step built from the tail integrals of the
    interaction Hamiltonian. ``X`` doubles until the result settles.
    """
    k, a = decomp.k, decomp.a
    Ginv = inv2(decomp.G_w_at_a)
    ctx = decomp.phase_context
    if isinstance(decomp.u_model, ZeroPotential):
        return TransferMatrix(Ginv, Convention.BREVE, k, ctx, "closed-form")
    tail_tol = 10 * tol if tail_tol is None else tail_tol
    H = _fast_inner(decomp)
    max_step = 2 * math.pi / k
    # propagate the reduced operator V = G^{-1} U G, generated by the inner Hamiltonian
    X = max(8 * a, a + 32 * math.pi / k)
    V = propagate(H, a, X, tol, max_step=max_step)

    def finish(V, X):
        I0, Ip, Im, _ = interaction_integrals(decomp, X, tol=tol * 1e-2)
        omega = np.array([[I0, Im], [-Ip, -I0]])
        return expm(-1j * omega) @ V @ Ginv

    prev = finish(V, X)
    while True:
        X2 = 2 * X
        if X2 > max_window:
            raise ConvergenceError("interaction-picture tail did not settle within the maximal window")
        V = propagate(H, X, X2, tol, max_step=max_step, U0=V)
        cur = finish(V, X2)
        err = float(np.max(np.abs(cur - prev)))
        X = X2
        if err < tail_tol:
            break
        prev = cur
    return TransferMatrix(cur, Convention.BREVE, k, ctx, "ode", err)
