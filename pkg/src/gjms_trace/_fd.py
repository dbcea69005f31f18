"""Finite-difference oracles for callables on points of shape (..., n)."""

from __future__ import annotations

import numpy as np

# 4th-order central stencils
_D1 = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))            # / 12h
_D2 = ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0))   # / 12h^2


def directional_derivative(f, x, e, h: float = 1e-4):
    """4th-order central difference of f along the vector field e at x."""
    x = np.asarray(x, dtype=float)
    e = np.asarray(e, dtype=float)
    return sum(c * f(x + s * h * e) for s, c in _D1) / (12.0 * h)


def second_directional(f, x, e, h: float = 1e-3):
    x = np.asarray(x, dtype=float)
    e = np.asarray(e, dtype=float)
    return sum(c * f(x + s * h * e) for s, c in _D2) / (12.0 * h * h)


def radial_derivative(f, x, h: float = 1e-4):
    """d/dr along x/|x|."""
    x = np.asarray(x, dtype=float)
    e = x / np.linalg.norm(x, axis=-1, keepdims=True)
    return directional_derivative(f, x, e, h)


def gradient(f, x, h: float = 1e-4):
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    return np.stack([directional_derivative(f, x, np.eye(n)[i], h) for i in range(n)], axis=-1)


def laplacian(f, x, h: float = 1e-3):
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    return sum(second_directional(f, x, np.eye(n)[i], h) for i in range(n))


def bilaplacian(f, x, h: float = 5e-3):
    """Nested 4th-order Laplacian; h balances h^4 truncation against eps/h^4."""
    return laplacian(lambda y: laplacian(f, y, h), x, h)
