"""Quadrature of slowly decaying oscillatory integrals on ``[a, inf)``.

Integrands have the form ``A(x) exp(i theta(x))`` with a monotone real
phase ``theta``. The half line is cut into cells on which ``theta``
advances by a fixed step, each cell is integrated by Gauss-Legendre, and
the sequence of partial sums is accelerated:

* pure oscillations (one exponential): cells of length ``pi`` make the
  partial sums alternate; repeated pairwise averaging removes the
  alternating tail;
* mixtures of oscillating and non-oscillating parts: cells of ``2 pi``
  make the tail a smooth function of the cell boundary, which is removed
  by Richardson extrapolation in ``1/X``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError

__all__ = ["QuadResult", "phase_cells", "oscillatory_integral", "mixed_oscillatory_integral"]

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    cells: int
    method: str


def phase_cells(phase: Callable, dphase: Callable, a: float, n: int, step: float = math.pi,
                start: float | None = None) -> np.ndarray:
    """Points ``x_0 = a < x_1 < ... < x_n`` with ``|theta(x_j) - theta(a)| = j*step``.

    ``start`` optionally gives ``theta(a)`` to avoid re-evaluation.
    """
    th0 = float(phase(a)) if start is None else start
    sign = 1.0 if dphase(a) > 0 else -1.0
    targets = th0 + sign * step * np.arange(1, n + 1)
    x = a + (targets - th0) / dphase(a)
    for _ in range(60):
        dx = (phase(x) - targets) / dphase(x)
        x = x - dx
        if np.max(np.abs(dx) / np.maximum(1.0, np.abs(x))) < 1e-14:
            break
    pts = np.concatenate(([a], x))
    if not np.all(np.diff(pts) > 0) or np.max(np.abs(phase(x) - targets)) > 1e-8 * (1 + abs(th0)):
        # robust fallback: sequential bracketing on the monotone phase
        pts = [a]
        for t in targets:
            lo = pts[-1]
            hi = lo + step / abs(dphase(lo))
            while sign * (phase(hi) - t) < 0:
                hi = lo + 2 * (hi - lo)
            pts.append(brentq(lambda s: phase(s) - t, lo, hi, xtol=1e-15 * max(1.0, hi), rtol=4e-16))
        pts = np.array(pts)
    return pts


def _cell_integrals(f: Callable, pts: np.ndarray, nq: int) -> np.ndarray:
    xg, wg = _gauss(nq)
    lo, hi = pts[:-1, None], pts[1:, None]
    half = 0.5 * (hi - lo)
    x = 0.5 * (hi + lo) + half * xg[None, :]
    return np.sum(f(x) * wg[None, :], axis=1) * half[:, 0]


def _averaged(partial: np.ndarray, depth: int) -> complex:
    seq = partial[-(depth + 1):].copy()
    while seq.size > 1:
        seq = 0.5 * (seq[1:] + seq[:-1])
    return complex(seq[0])


def oscillatory_integral(amplitude: Callable, phase: Callable, dphase: Callable, a: float,
                         tol: float = 1e-10, nq: int = 16, start_cells: int = 64,
                         max_cells: int = 1 << 17, depth: int = 12) -> QuadResult:
    """``int_a^inf A(x) exp(i theta(x)) dx`` for algebraically decaying ``A``.

    ``amplitude``, ``phase`` and ``dphase`` must accept numpy arrays.
    Falls back to the plain partial sum plus an integration-by-parts tail
    estimate if the averaged sequence stalls.
    """
    th0 = float(phase(a))

    def f(x):
        return amplitude(x) * np.exp(1j * (phase(x) - th0))

    n = start_cells
    pts = phase_cells(phase, dphase, a, n, math.pi, th0)
    cells = _cell_integrals(f, pts, nq)
    sums = np.cumsum(cells)
    mass = float(np.sum(np.abs(cells)))
    prev = _averaged(sums, depth)
    ref = np.exp(1j * th0)
    while n < max_cells:
        more = phase_cells(phase, dphase, pts[-1], n, math.pi, float(phase(pts[-1])))
        cells = _cell_integrals(f, more, nq)
        mass += float(np.sum(np.abs(cells)))
        sums = np.concatenate((sums, sums[-1] + np.cumsum(cells)))
        pts = np.concatenate((pts, more[1:]))
        n *= 2
        est = _averaged(sums, depth)
        err = abs(est - prev)
        # below the rounding floor of the partial sums nothing more can be gained
        if err < max(tol, 64 * np.finfo(float).eps * mass):
            return QuadResult(complex(est * ref), err, n, "averaged")
        prev = est
    X = pts[-1]
    tail = -amplitude(X) * np.exp(1j * (phase(X) - th0)) / (1j * dphase(X))
    err = abs(tail)
    if err > 1e3 * tol:
        raise ConvergenceError("oscillatory quadrature: acceleration stalled and the tail bound is too large")
    return QuadResult(complex((sums[-1] + tail) * ref), err, n, "brute+tail")


def mixed_oscillatory_integral(f: Callable, phase: Callable, dphase: Callable, a: float,
                               decay: float, tol: float = 1e-10, nq: int = 32,
                               start_cells: int = 64, max_cells: int = 1 << 15,
                               terms: int = 4) -> QuadResult:
    """``int_a^inf f(x) dx`` for ``f`` mixing ``exp(+-i theta)`` and smooth parts.

    ``decay`` is the algebraic decay exponent of ``f``'s envelope, so the
    smooth tail behaves like ``X**(1-decay)``. Partial sums at points
    where ``theta`` has advanced by whole periods are extrapolated in
    ``1/X`` with exponents ``decay-1, decay, ...``.
    """
    th0 = float(phase(a))
    q0 = decay - 1.0
    n = start_cells
    pts = phase_cells(phase, dphase, a, n, 2 * math.pi, th0)
    sums = np.cumsum(_cell_integrals(f, pts, nq))

    def extrapolate(count: int) -> complex:
        idx = [count // (2 ** j) - 1 for j in range(terms + 1)]
        X = np.array([pts[i + 1] for i in idx])
        P = np.array([sums[i] for i in idx])
        basis = np.column_stack([np.ones_like(X)] + [X ** (-(q0 + m)) for m in range(terms)])
        # scale columns for conditioning
        scale = np.max(np.abs(basis), axis=0)
        sol = np.linalg.solve(basis / scale, P)
        return complex(sol[0] / scale[0])

    prev = extrapolate(n)
    while n < max_cells:
        more = phase_cells(phase, dphase, pts[-1], n, 2 * math.pi, float(phase(pts[-1])))
        sums = np.concatenate((sums, sums[-1] + np.cumsum(_cell_integrals(f, more, nq))))
        pts = np.concatenate((pts, more[1:]))
        n *= 2
        est = extrapolate(n)
        err = abs(est - prev)
        if err < tol:
            return QuadResult(est, err, n, "richardson")
        prev = est
    raise ConvergenceError("mixed oscillatory quadrature did not converge")
