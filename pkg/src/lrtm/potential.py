"""Complex potentials on the real line.

A potential is an immutable object that knows its values, its first two
derivatives, where it is supported, how fast it decays, and the primitive
``P(x) = int_0^x v(s) ds``. The parametric families carry closed forms
for everything; the tabulated and callable families fall back to
interpolation and adaptive quadrature respectively.

Values outside the support are exact zeros, so truncations and
dissections add up pointwise without rounding residue.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, ClassVar

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import ConvergenceError, DomainError, LongRangeError

INF = math.inf

__all__ = [
    "Interval",
    "Potential",
    "ZeroPotential",
    "SquareBarrier",
    "CoulombLike",
    "TabulatedPotential",
    "CallablePotential",
    "evaluate",
    "truncate",
    "dissect",
    "load_tabulated_csv",
]


@dataclass(frozen=True)
class Interval:
    """A real interval whose finite endpoints may be open or closed.

    Infinite endpoints are always stored as open so that equal sets
    compare equal.
    """

    lo: float = -INF
    hi: float = INF
    closed_lo: bool = True
    closed_hi: bool = True

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise DomainError("interval endpoints must not be NaN")
        if lo > hi:
            raise DomainError(f"empty interval: lo={lo} > hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if math.isinf(lo):
            object.__setattr__(self, "closed_lo", False)
        if math.isinf(hi):
            object.__setattr__(self, "closed_hi", False)

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    @property
    def bounded_below(self) -> bool:
        return math.isfinite(self.lo)

    @property
    def bounded_above(self) -> bool:
        return math.isfinite(self.hi)

    def contains(self, x):
        """Membership test; works on scalars and on arrays."""
        above = (x >= self.lo) if self.closed_lo else (x > self.lo)
        below = (x <= self.hi) if self.closed_hi else (x < self.hi)
        return above & below

    def intersect(self, other: "Interval") -> "Interval | None":
        if self.lo > other.lo:
            lo, clo = self.lo, self.closed_lo
        elif self.lo < other.lo:
            lo, clo = other.lo, other.closed_lo
        else:
            lo, clo = self.lo, self.closed_lo and other.closed_lo
        if self.hi < other.hi:
            hi, chi = self.hi, self.closed_hi
        elif self.hi > other.hi:
            hi, chi = other.hi, other.closed_hi
        else:
            hi, chi = self.hi, self.closed_hi and other.closed_hi
        if lo > hi or (lo == hi and not (clo and chi)):
            return None
        return Interval(lo, hi, clo, chi)

    def clip(self, x):
        return np.clip(x, self.lo, self.hi)


def _quad_complex(f: Callable[[float], complex], lo: float, hi: float,
                  points=None, epsabs: float = 1e-13, epsrel: float = 1e-12,
                  limit: int = 400) -> tuple[complex, float]:
    """Adaptive quadrature of a complex integrand over a finite or infinite range."""
    if lo == hi:
        return 0j, 0.0
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    if points is not None and math.isfinite(lo) and math.isfinite(hi):
        pts = [p for p in points if lo < p < hi]
        if pts:
            kw["points"] = pts
    out = []
    err = 0.0
    for part in (lambda s: f(s).real, lambda s: f(s).imag):
        res = integrate.quad(part, lo, hi, **kw)
        val, e = res[0], res[1]
        if len(res) > 3:  # a warning message was attached
            if e > max(10 * epsabs, 10 * epsrel * abs(val)):
                raise ConvergenceError(f"quadrature on [{lo}, {hi}] did not converge: {res[3]}")
        out.append(val)
        err += e
    return complex(out[0], out[1]), err


class Potential:
    """Common behaviour of all potential families.

    Subclasses are frozen dataclasses providing ``support`` and the raw
    formulas ``_raw``, ``_raw_d1``, ``_raw_d2`` valid on the support.
    """

    family: ClassVar[str] = "abstract"
    has_analytic_derivatives: ClassVar[bool] = False
    support: Interval | None

    # -- formulas on the support -------------------------------------------
    def _raw(self, x):
        raise NotImplementedError

    def _raw_d1(self, x):
        raise NotImplementedError

    def _raw_d2(self, x):
        raise NotImplementedError

    def _masked(self, fn, x):
        sup = self.support
        if np.ndim(x) == 0:
            xf = float(x)
            if sup is None or not sup.contains(xf):
                return 0j
            return complex(fn(xf))
        xa = np.asarray(x, dtype=float)
        out = np.zeros(xa.shape, dtype=complex)
        if sup is not None:
            m = sup.contains(xa)
            if np.any(m):
                out[m] = fn(xa[m])
        return out

    # -- public evaluators -------------------------------------------------
    def value(self, x):
        return self._masked(self._raw, x)

    def derivative(self, x, order: int = 1):
        if order == 0:
            return self.value(x)
        if order == 1:
            return self._masked(self._raw_d1, x)
        if order == 2:
            return self._masked(self._raw_d2, x)
        raise DomainError("only derivatives of order 0, 1, 2 are available")

    __call__ = value

    # -- metadata ----------------------------------------------------------
    @property
    def decay_alpha(self) -> float:
        return INF

    @property
    def im_decay_alpha(self) -> float:
        return INF if self.is_real else self.decay_alpha

    @property
    def is_real(self) -> bool:
        return False

    @property
    def is_short_range(self) -> bool:
        return self.decay_alpha > 1

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.support is None:
            return ()
        return tuple(p for p in (self.support.lo, self.support.hi) if math.isfinite(p))

    # -- integrals -----------------------------------------------------------
    def primitive(self, x):
        """``int_0^x v(s) ds`` (signed, so negative ``x`` integrates leftwards)."""
        if np.ndim(x) == 0:
            return self._quad_primitive(float(x))
        xa = np.asarray(x, dtype=float)
        return np.array([self._quad_primitive(t) for t in xa.ravel()]).reshape(xa.shape)

    def _quad_primitive(self, x: float) -> complex:
        sup = self.support
        if sup is None or x == 0.0:
            return 0j
        lo, hi = (0.0, x) if x > 0 else (x, 0.0)
        a, b = max(lo, sup.lo), min(hi, sup.hi)
        if a >= b:
            return 0j
        val, _ = _quad_complex(self._raw, a, b)
        return val if x > 0 else -val

    def integral(self, lo: float, hi: float) -> complex:
        return complex(self.primitive(hi) - self.primitive(lo))

    def primitive_limit(self, side: int) -> complex | None:
        """``lim P(x)`` for ``x -> side*inf``.

        Returns None when no closed form is known; raises LongRangeError
        when the limit does not exist.
        """
        sup = self.support
        if sup is None:
            return 0j
        edge = sup.hi if side > 0 else sup.lo
        if math.isfinite(edge):
            return complex(self.primitive(edge))
        if not self.is_short_range:
            raise LongRangeError(f"{self.family} potential is long-range; the phase limit does not exist")
        return None

    def imag_primitive_limit(self, side: int) -> float | None:
        """``lim Im P(x)``; same conventions as :meth:`primitive_limit`."""
        sup = self.support
        if self.is_real or sup is None:
            return 0.0
        edge = sup.hi if side > 0 else sup.lo
        if math.isfinite(edge):
            return complex(self.primitive(edge)).imag
        if self.im_decay_alpha <= 1:
            raise LongRangeError("imaginary part of the potential is long-range")
        return None

    def restrict(self, interval: Interval) -> "Potential":
        if self.support is None:
            return ZeroPotential()
        sup = self.support.intersect(interval)
        if sup is None:
            return ZeroPotential()
        return replace(self, support=sup)


@dataclass(frozen=True)
class ZeroPotential(Potential):
    family: ClassVar[str] = "zero"
    has_analytic_derivatives: ClassVar[bool] = True
    support: Interval | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", None)

    @property
    def is_real(self) -> bool:
        return True

    def primitive(self, x):
        return 0j if np.ndim(x) == 0 else np.zeros(np.shape(x), dtype=complex)


@dataclass(frozen=True)
class SquareBarrier(Potential):
    """Constant ``height`` on ``[left, right]``."""

    height: complex
    left: float
    right: float
    support: Interval | None = None

    family: ClassVar[str] = "square-barrier"
    has_analytic_derivatives: ClassVar[bool] = True

    def __post_init__(self) -> None:
        if not self.left < self.right:
            raise DomainError("square barrier needs left < right")
        object.__setattr__(self, "height", complex(self.height))
        if self.support is None:
            object.__setattr__(self, "support", Interval(self.left, self.right))

    def _raw(self, x):
        return self.height if np.ndim(x) == 0 else np.full(np.shape(x), self.height)

    def _raw_d1(self, x):
        return 0j if np.ndim(x) == 0 else np.zeros(np.shape(x), dtype=complex)

    _raw_d2 = _raw_d1

    @property
    def is_real(self) -> bool:
        return self.height.imag == 0.0

    def primitive(self, x):
        sup = self.support
        return self.height * (np.clip(x, sup.lo, sup.hi) - min(max(0.0, sup.lo), sup.hi))


@dataclass(frozen=True)
class CoulombLike(Potential):
    """``v(x) = g/x + z/x**2`` for ``x >= a`` and zero below ``a``."""

    g: float
    z: complex
    a: float = 1.0
    support: Interval | None = None

    family: ClassVar[str] = "coulomb-like"
    has_analytic_derivatives: ClassVar[bool] = True

    def __post_init__(self) -> None:
        g = complex(self.g)
        if g.imag != 0.0:
            raise DomainError("the Coulomb coupling g must be real")
        if not self.a > 0:
            raise DomainError("the cut a must be positive")
        object.__setattr__(self, "g", g.real)
        object.__setattr__(self, "z", complex(self.z))
        own = Interval(self.a, INF, True, False)
        sup = own if self.support is None else own.intersect(self.support)
        if sup is None:
            raise DomainError("support does not meet [a, inf)")
        object.__setattr__(self, "support", sup)

    def _raw(self, x):
        return self.g / x + self.z / (x * x)

    def _raw_d1(self, x):
        return -self.g / (x * x) - 2.0 * self.z / (x * x * x)

    def _raw_d2(self, x):
        x2 = x * x
        return 2.0 * self.g / (x2 * x) + 6.0 * self.z / (x2 * x2)

    @property
    def is_real(self) -> bool:
        return self.z.imag == 0.0

    @property
    def decay_alpha(self) -> float:
        if self.support.bounded_above:
            return INF
        if self.g != 0.0:
            return 1.0
        return 2.0 if self.z != 0 else INF

    @property
    def im_decay_alpha(self) -> float:
        if self.support.bounded_above or self.z.imag == 0.0:
            return INF
        return 2.0

    def primitive(self, x):
        lo, hi = self.support.lo, self.support.hi
        if np.ndim(x) == 0:
            xc = min(max(float(x), lo), hi)
            return self.g * math.log(xc / lo) + self.z * (1.0 / lo - 1.0 / xc)
        xc = np.clip(np.asarray(x, dtype=float), lo, hi)
        return self.g * np.log(xc / lo) + self.z * (1.0 / lo - 1.0 / xc)

    def primitive_limit(self, side: int) -> complex | None:
        if side < 0:
            return 0j
        if self.support.bounded_above:
            return complex(self.primitive(self.support.hi))
        if self.g != 0.0:
            raise LongRangeError("g/x tail: the phase limit does not exist")
        return self.z / self.support.lo

    def imag_primitive_limit(self, side: int) -> float | None:
        if side < 0:
            return 0.0
        if self.support.bounded_above:
            return complex(self.primitive(self.support.hi)).imag
        return self.z.imag / self.support.lo


@dataclass(frozen=True, eq=False)
class TabulatedPotential(Potential):
    """Monotone cubic (PCHIP) interpolation of sampled values.

    ``decay_alpha`` is metadata supplied by the user; a tabulated
    potential always has bounded support, so it only steers heuristics.
    """

    x: np.ndarray
    re: np.ndarray
    im: np.ndarray | None = None
    user_decay_alpha: float = INF
    support: Interval | None = None
    _re: PchipInterpolator = field(init=False, repr=False)
    _im: PchipInterpolator | None = field(init=False, repr=False)
    _p_re: PchipInterpolator = field(init=False, repr=False)
    _p_im: PchipInterpolator | None = field(init=False, repr=False)

    family: ClassVar[str] = "tabulated"

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
            raise DomainError("tabulated abscissae must be strictly increasing (>= 2 points)")
        re = np.asarray(self.re, dtype=float)
        im = None if self.im is None else np.asarray(self.im, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "_re", PchipInterpolator(x, re, extrapolate=False))
        object.__setattr__(self, "_im", None if im is None or not np.any(im)
                           else PchipInterpolator(x, im, extrapolate=False))
        object.__setattr__(self, "_p_re", self._re.antiderivative())
        object.__setattr__(self, "_p_im", None if self._im is None else self._im.antiderivative())
        own = Interval(x[0], x[-1])
        sup = own if self.support is None else own.intersect(self.support)
        if sup is None:
            raise DomainError("support does not meet the sample range")
        object.__setattr__(self, "support", sup)

    def _eval(self, x, nu: int):
        out = np.asarray(self._re(x, nu), dtype=complex)
        if self._im is not None:
            out = out + 1j * self._im(x, nu)
        return out if np.ndim(x) else complex(out)

    def _raw(self, x):
        return self._eval(x, 0)

    def _raw_d1(self, x):
        return self._eval(x, 1)

    def _raw_d2(self, x):
        return self._eval(x, 2)

    @property
    def is_real(self) -> bool:
        return self._im is None

    @property
    def decay_alpha(self) -> float:
        return self.user_decay_alpha

    def primitive(self, x):
        sup = self.support
        p_re, p_im = self._p_re, self._p_im

        def prim(t):
            t = np.clip(t, sup.lo, sup.hi)
            val = np.asarray(p_re(t), dtype=complex)
            if p_im is not None:
                val = val + 1j * p_im(t)
            return val

        res = prim(np.asarray(x, dtype=float)) - prim(np.asarray(0.0))
        return complex(res) if np.ndim(x) == 0 else res

    def primitive_limit(self, side: int) -> complex:
        return complex(self.primitive(self.support.hi if side > 0 else self.support.lo))


@dataclass(frozen=True, eq=False)
class CallablePotential(Potential):
    """A potential defined by user-supplied vectorised callables.

    Used for derived potentials (for instance the background-subtracted
    part of a decomposition). Integrals fall back to adaptive quadrature.
    """

    func: Callable
    support: Interval | None = None
    alpha: float = INF
    im_alpha: float | None = None
    real: bool = False
    d1: Callable | None = None
    d2: Callable | None = None
    label: str = "callable"
    prim: Callable | None = None

    family: ClassVar[str] = "callable"

    def primitive(self, x):
        if self.prim is None:
            return super().primitive(x)
        return self.prim(x)

    @property
    def has_analytic_derivatives(self) -> bool:  # type: ignore[override]
        return self.d1 is not None and self.d2 is not None

    def _raw(self, x):
        return self.func(x)

    def _raw_d1(self, x):
        if self.d1 is None:
            raise NotImplementedError(f"{self.label}: no derivative evaluator")
        return self.d1(x)

    def _raw_d2(self, x):
        if self.d2 is None:
            raise NotImplementedError(f"{self.label}: no second-derivative evaluator")
        return self.d2(x)

    @property
    def is_real(self) -> bool:
        return self.real

    @property
    def decay_alpha(self) -> float:
        return INF if self.support is not None and self.support.bounded_above else self.alpha

    @property
    def im_decay_alpha(self) -> float:
        if self.real:
            return INF
        return self.decay_alpha if self.im_alpha is None else self.im_alpha


# -- module-level operations ------------------------------------------------

def evaluate(model: Potential, x: float) -> complex:
    """Value of ``model`` at the finite point ``x``."""
    if not math.isfinite(x):
        raise DomainError("evaluate needs a finite coordinate")
    return model.value(x)


def truncate(model: Potential, lo: float, hi: float,
             closed_lo: bool = True, closed_hi: bool = False) -> Potential:
    """Restrict ``model`` to the interval ``[lo, hi)`` (closure flags adjustable).

    An empty intersection yields the zero potential.
    """
    if not lo < hi:
        raise DomainError(f"truncate needs lo < hi, got {lo}, {hi}")
    return model.restrict(Interval(lo, hi, closed_lo, closed_hi))


def dissect(model: Potential, a: float) -> tuple[Potential, Potential, Potential]:
    """Split ``model`` into pieces on ``(-inf,-a]``, ``(-a,a)`` and ``[a,inf)``."""
    if not a > 0:
        raise DomainError("dissect needs a > 0")
    return (
        model.restrict(Interval(-INF, -a, False, True)),
        model.restrict(Interval(-a, a, False, False)),
        model.restrict(Interval(a, INF, True, False)),
    )


def load_tabulated_csv(path, decay_alpha: float = INF) -> TabulatedPotential:
    """Read ``x, Re v[, Im v]`` rows (header lines starting with '#' are skipped)."""
    xs, re, im = [], [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                if not xs:  # tolerate a textual header
                    continue
                raise DomainError(f"non-numeric row in {path}: {row}") from None
            if len(vals) not in (2, 3):
                raise DomainError(f"expected 2 or 3 columns in {path}, got {len(vals)}")
            xs.append(vals[0])
            re.append(vals[1])
            im.append(vals[2] if len(vals) == 3 else 0.0)
    return TabulatedPotential(np.array(xs), np.array(re), np.array(im), user_decay_alpha=decay_alpha)
