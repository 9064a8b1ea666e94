"""Small 2x2 complex matrix toolkit (numpy arrays of shape (2, 2))."""

from __future__ import annotations

import cmath

import numpy as np

I2 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
# Nilpotent matrix generating the standard Hamiltonian.
K = np.array([[1, 1], [-1, -1]], dtype=complex)


def mat(a, b, c, d) -> np.ndarray:
    return np.array([[a, b], [c, d]], dtype=complex)


def det2(m: np.ndarray) -> complex:
    return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def inv2(m: np.ndarray) -> np.ndarray:
    d = det2(m)
    if d == 0:
        raise ZeroDivisionError("singular 2x2 matrix")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex) / d


def exp_sigma3(theta: complex) -> np.ndarray:
    """``exp(theta * sigma3)`` for complex ``theta``."""
    e = cmath.exp(theta)
    return np.array([[e, 0], [0, 1.0 / e]], dtype=complex)


def sandwich(left: complex, m: np.ndarray, right: complex) -> np.ndarray:
    """``exp(left*sigma3) @ m @ exp(right*sigma3)`` without forming products."""
    el, er = cmath.exp(left), cmath.exp(right)
    return np.array([[el * m[0, 0] * er, el * m[0, 1] / er],
                     [m[1, 0] * er / el, m[1, 1] / (el * er)]], dtype=complex)


def pseudo_adjoint(m: np.ndarray) -> np.ndarray:
    """``sigma3 @ m^dagger @ sigma3``; equal to ``m`` for sigma3-pseudo-Hermitian ``m``."""
    return SIGMA3 @ m.conj().T @ SIGMA3
