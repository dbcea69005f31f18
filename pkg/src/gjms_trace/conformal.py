"""
Moebius maps of the unit ball, stereographic and half-space transfer maps,
and the closed-form extremal families.

Everything here is a pointwise closed form; points are arrays of shape
(..., n) and broadcasting follows numpy rules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sphere_harmonics import ZonalSpectrum, legendre_expand_zonal


def _dot(a, b):
    return np.sum(a * b, axis=-1)


@dataclass(frozen=True)
class MoebiusParam:
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 1:
            raise ValueError("Moebius parameter must be a single point")
        if _dot(a, a) >= 1.0:
            raise ValueError(f"|a| must be < 1, got {np.linalg.norm(a)}")
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.size

    @classmethod
    def axial(cls, r: float, n: int = 3) -> "MoebiusParam":
        """a = r e_n."""
        a = np.zeros(n)
        a[-1] = r
        return cls(a)


@dataclass(frozen=True)
class BubbleParam:
    center: np.ndarray   # z0' in R^{n-1}
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("bubble width eps must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))


def _param(a) -> MoebiusParam:
    return a if isinstance(a, MoebiusParam) else MoebiusParam(np.asarray(a, dtype=float))


def denominator(a, x):
    """D = |a|^2 |x|^2 - 2 a.x + 1; equals |x - a|^2 on the unit sphere."""
    a = _param(a).a
    x = np.asarray(x, dtype=float)
    return _dot(a, a) * _dot(x, x) - 2.0 * _dot(a, x) + 1.0


def psi_a(a, x):
    """Moebius map of the ball sending a to 0 (polynomial form, valid at a=0)."""
    a = _param(a).a
    x = np.asarray(x, dtype=float)
    xx = _dot(x, x)[..., None]
    ax = _dot(a, x)[..., None]
    aa = _dot(a, a)
    num = x - a - xx * a + 2.0 * ax * a - aa * x
    return num / denominator(a, x)[..., None]


def conformal_factor(a, x):
    """(1 - |a|^2) / D: psi_a pulls |dy|^2 back to factor^2 |dx|^2."""
    a = _param(a).a
    return (1.0 - _dot(a, a)) / denominator(a, x)


def stereographic(y):
    """Inverse stereographic projection R^2 -> S^2 minus the south pole."""
    y = np.asarray(y, dtype=float)
    yy = _dot(y, y)[..., None]
    return np.concatenate([2.0 * y, 1.0 - yy], axis=-1) / (1.0 + yy)


def stereographic_inverse(x):
    x = np.asarray(x, dtype=float)
    d = 1.0 + x[..., -1]
    if np.any(d <= 1e-300):
        raise ValueError("stereographic inverse undefined at the south pole")
    return x[..., :-1] / d[..., None]


def halfspace_map(z):
    """
    Inversion about the sphere of radius sqrt(2) centred at -e_n.  Sends the
    upper half-space to the ball and its boundary to the sphere; it is its
    own inverse.
    """
    z = np.asarray(z, dtype=float)
    w = z.copy()
    w[..., -1] += 1.0
    ww = _dot(w, w)
    if np.any(ww == 0.0):
        raise ValueError("half-space map is singular at -e_n")
    out = 2.0 * w / ww[..., None]
    out[..., -1] -= 1.0
    return out


halfspace_map_inverse = halfspace_map


def halfspace_factor(z):
    """2 / ((1+z_n)^2 + |z'|^2): F pulls |dx|^2 back to factor^2 |dz|^2."""
    z = np.asarray(z, dtype=float)
    return 2.0 / ((1.0 + z[..., -1]) ** 2 + _dot(z[..., :-1], z[..., :-1]))


def param_change(a) -> BubbleParam:
    """Ball parameter a -> half-space bubble (z0', eps) = F(a)."""
    a = _param(a).a
    d = _dot(a, a) + 2.0 * a[-1] + 1.0
    return BubbleParam(center=2.0 * a[:-1] / d, eps=(1.0 - _dot(a, a)) / d)


def extremal_ball(a, n: int, x):
    """
    Closed-form extremal U_a on the closed ball B^n.

    n != 4: f^{(n-4)/2} + (n-4)/4 (1-|x|^2) f^{(n-2)/2} with f the conformal
    factor; for n = 3 this is the biharmonic equality case of the trace
    inequality.  n = 4: log f + (1-|x|^2)/2 (f - 1).
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    a = _param(a)
    if a.n != n:
        raise ValueError(f"parameter lives in R^{a.n}, expected R^{n}")
    x = np.asarray(x, dtype=float)
    f = conformal_factor(a, x)
    rho = 1.0 - _dot(x, x)
    if n == 4:
        return np.log(f) + 0.5 * rho * (f - 1.0)
    return f ** ((n - 4) / 2.0) + (n - 4) / 4.0 * rho * f ** ((n - 2) / 2.0)


def extremal_sphere_trace(a, x):
    """
    Boundary value of extremal_ball on |x| = 1, dimension taken from a.
    For n = 3 this is |x - a| / sqrt(1 - |a|^2).
    """
    a = _param(a)
    f = conformal_factor(a, x)
    if a.n == 4:
        return np.log(f)
    return f ** ((a.n - 4) / 2.0)


def bubble_plane(p: BubbleParam, y):
    """sqrt((eps^2 + |y - y0|^2) / (2 eps))."""
    y = np.asarray(y, dtype=float)
    d = y - p.center
    return np.sqrt((p.eps ** 2 + _dot(d, d)) / (2.0 * p.eps))


def sphere_to_plane(u, y):
    """
    Pull a function on S^2 back to R^2 with the conformal weight that turns
    u^-4 g_{S^2} into v^-4 |dy|^2: v(y) = u(I(y)) sqrt((1+|y|^2)/2).
    `u` is a callable on unit vectors.
    """
    y = np.asarray(y, dtype=float)
    return u(stereographic(y)) * np.sqrt((1.0 + _dot(y, y)) / 2.0)


def extremal_zonal_spectrum(n: int, r: float, L: int) -> ZonalSpectrum:
    """Zonal spectrum of the dimension-n extremal trace with a = r e_n."""
    a = MoebiusParam.axial(r, n)

    def f(t):
        x = np.zeros(np.shape(t) + (n,))
        x[..., -1] = t
        x[..., 0] = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
        return extremal_sphere_trace(a, x)

    return legendre_expand_zonal(f, n, L)
