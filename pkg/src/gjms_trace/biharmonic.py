"""
Biharmonic extension of boundary data to the unit ball B^n under the
Neumann condition dU/dr = -(n-4)/2 u, the boundary operator B_3^3, and the
sharp trace-inequality deficits.

Per degree, U_k = |x|^k Y_k(x/|x|) [1 + e_k (1 - |x|^2)] with
e_k = k/2 + (n-4)/4, and Delta U_k = c_k |x|^k Y_k with
c_k = -(k + (n-4)/2)(2k + n).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from . import _fd
from .gjms import POSITIVITY_RATIO, p3_multiplier
from .sphere_harmonics import (
    HarmonicSpectrum,
    ZonalSpectrum,
    degrees,
    oversampled_grid,
    real_harmonics,
    sphere_area,
    synthesize,
    zonal_basis,
    zonal_grid,
)


def extension_coefficient(k, n: int):
    """e_k = k/2 + (n-4)/4."""
    return np.asarray(k, dtype=float) / 2.0 + (n - 4) / 4.0


def laplacian_coefficient(k, n: int):
    """c_k = -(k + (n-4)/2)(2k + n)."""
    k = np.asarray(k, dtype=float)
    return -(k + (n - 4) / 2.0) * (2.0 * k + n)


def _degrees_of(spec):
    if isinstance(spec, ZonalSpectrum):
        return np.arange(spec.L + 1)
    return degrees(spec.L)


@dataclass(frozen=True)
class BallExtension:
    n: int
    spectrum: object   # HarmonicSpectrum (n=3) or ZonalSpectrum

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if isinstance(self.spectrum, ZonalSpectrum):
            if self.spectrum.n != self.n:
                raise ValueError("zonal spectrum dimension does not match n")
        elif self.n != 3:
            raise ValueError("full harmonic data is only supported for n = 3; use ZonalSpectrum")

    @property
    def k(self) -> np.ndarray:
        return _degrees_of(self.spectrum)

    @property
    def e(self) -> np.ndarray:
        return extension_coefficient(self.k, self.n)

    @property
    def c(self) -> np.ndarray:
        return laplacian_coefficient(self.k, self.n)

    def _angular(self, x):
        """Basis values at x/|x|, shape (..., n_coeffs), and |x|."""
        r = np.linalg.norm(x, axis=-1)
        if isinstance(self.spectrum, ZonalSpectrum):
            safe = np.where(r == 0.0, 1.0, r)
            Y = np.moveaxis(zonal_basis(self.spectrum.L, self.n, x[..., -1] / safe), 0, -1)
        else:
            Y = real_harmonics(self.spectrum.L, x)
        return Y, r

    def eval(self, x):
        """(U, Delta U, dU/dr) at points x of shape (..., n), |x| <= 1."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise ValueError(f"points must live in R^{self.n}")
        r0 = np.linalg.norm(x, axis=-1)
        if np.any(r0 > 1.0 + 1e-12):
            raise ValueError("points must lie in the closed unit ball")
        Y, r = self._angular(x)
        k, e, c = self.k, self.e, self.c
        r = r[..., None]
        rk = r ** k
        u = self.spectrum.coeffs
        U = np.sum(u * Y * rk * (1.0 + e * (1.0 - r * r)), axis=-1)
        lap = np.sum(u * Y * c * rk, axis=-1)
        # d/dr [(1+e) r^k - e r^{k+2}]
        rkm1 = np.where(k > 0, r ** np.maximum(k - 1, 0), 0.0)
        dr = np.sum(u * Y * (k * (1.0 + e) * rkm1 - (k + 2.0) * e * r ** (k + 1)), axis=-1)
        return U, lap, dr

    def __call__(self, x):
        return self.eval(x)[0]


def extend(spectrum, n: int = 3) -> BallExtension:
    return BallExtension(n, spectrum)


def bulk_energy(ext: BallExtension) -> float:
    """int_B (Delta U)^2 dx = sum u_k^2 c_k^2 / (2k + n)."""
    k = ext.k
    return float(np.sum(ext.spectrum.coeffs ** 2 * ext.c ** 2 / (2.0 * k + ext.n)))


def b33_multiplier(k, n: int):
    """
    Per-degree value of B_3^3 on the extension of a degree-k harmonic,
    assembled from its terms:
      -d(Delta U)/dr - (n-4)/2 d^2U/dr^2 - (n/2) Lap_S u + (n-4)(n^2-3n+4)/4 u.
    """
    k = np.asarray(k, dtype=float)
    c = laplacian_coefficient(k, n)
    d2 = k * (k - 1.0) - (2.0 * k + 1.0) * (k + (n - 4) / 2.0)
    lam = k * (k + n - 2.0)
    return -k * c - (n - 4) / 2.0 * d2 + n / 2.0 * lam + (n - 4) * (n * n - 3 * n + 4) / 4.0


def boundary_operator_b33(ext: BallExtension):
    """B_3^3 U as a boundary spectrum (equal to 2 P3 u degree by degree)."""
    return ext.spectrum.multiply(lambda k: b33_multiplier(k, ext.n))


def q3(n: int) -> float:
    """Q_3 = (2/(n-4)) p3(0, n); undefined at n = 4."""
    if n == 4:
        raise ValueError("Q_3 formula excludes n = 4")
    return 2.0 / (n - 4) * float(p3_multiplier(0, n))


def trace_form_multiplier(k, n: int = 3):
    """
    Per-degree weight of  int(Delta U)^2 + 2 int|grad u|^2 + b int u^2,
    with b = -3/2 for n = 3 and b = n(n-4)/2 otherwise.
    """
    k = np.asarray(k, dtype=float)
    b = -1.5 if n == 3 else n * (n - 4) / 2.0
    return laplacian_coefficient(k, n) ** 2 / (2.0 * k + n) + 2.0 * k * (k + n - 2.0) + b


def trace_rhs(spec) -> float:
    n = spec.n if isinstance(spec, ZonalSpectrum) else 3
    return float(np.sum(spec.coeffs ** 2 * trace_form_multiplier(_degrees_of(spec), n)))


def _positive(samples, what="u"):
    lo, hi = float(np.min(samples)), float(np.max(np.abs(samples)))
    if not lo > POSITIVITY_RATIO * hi:
        raise ValueError(f"{what} is not positive on the quadrature grid (min {lo:.3g})")


def trace_deficit_n3(spec: HarmonicSpectrum, oversample: int = 4):
    """
    (lhs, rhs, deficit) of the n = 3 trace inequality
    -(3/4)|S^2|^{3/2} (int u^-4)^{-1/2} <= int(Delta U)^2 + 2 int|grad u|^2 - 3/2 int u^2.
    """
    grid = oversampled_grid(spec.L, oversample)
    u = synthesize(spec, grid)
    _positive(u)
    A = grid.integrate(u ** -4.0)
    lhs = -0.75 * (4.0 * pi) ** 1.5 / np.sqrt(A)
    rhs = trace_rhs(spec)
    return lhs, rhs, rhs - lhs


def trace_deficit_general(spec: ZonalSpectrum, n_nodes: int | None = None):
    """(lhs, rhs, deficit) for zonal data on S^{n-1}, n >= 5."""
    n = spec.n
    if n < 5:
        raise ValueError("general-n inequality needs n >= 5")
    g = zonal_grid(n, n_nodes or 4 * (spec.L + 1))
    u = spec.evaluate(g.t)
    _positive(u)
    p = 2.0 * (n - 1) / (n - 4)
    cn = n * (n - 2) * (n - 4) / 4.0
    lhs = cn * sphere_area(n) ** (3.0 / (n - 1)) * g.integrate(np.abs(u) ** p) ** ((n - 4) / (n - 1))
    rhs = trace_rhs(spec)
    return lhs, rhs, rhs - lhs


def trace_deficit_n4(spec: ZonalSpectrum, n_nodes: int | None = None):
    """
    (lhs, rhs, deficit) of the n = 4 log inequality
    log((1/2pi^2) int e^{3(u - ubar)}) <= (3/16pi^2)[int(Delta U)^2 + 2 int|grad u|^2].
    """
    if spec.n != 4:
        raise ValueError("expected zonal data on S^3")
    g = zonal_grid(4, n_nodes or 4 * (spec.L + 1))
    area = sphere_area(4)                  # 2 pi^2
    ubar = spec.mean
    u = spec.evaluate(g.t)
    lhs = float(np.log(g.integrate(np.exp(3.0 * (u - ubar))) / area))
    k = np.arange(spec.L + 1, dtype=float)
    w = laplacian_coefficient(k, 4) ** 2 / (2.0 * k + 4.0) + 2.0 * k * (k + 2.0)
    rhs = 3.0 / (16.0 * pi * pi) * float(np.sum(w * spec.coeffs ** 2))
    return lhs, rhs, rhs - lhs


def amend_extension(U, grad_U=None, V=None, check_points=None, tol: float = 1e-8):
    """
    Amended field  (|x|^2+3)/4 U + (1-|x|^2)/2 x.grad U + V, which takes
    boundary value u and radial derivative u/2 for any smooth U.

    U, grad_U, V are callables on points (..., 3); grad_U defaults to
    finite differences.  V must vanish to first order on the sphere; this is
    checked at `check_points` (unit vectors, default a fixed spiral set).
    """
    if grad_U is None:
        def grad_U(x):
            return _fd.gradient(U, x)
    if V is not None:
        pts = fibonacci_sphere(64) if check_points is None else np.asarray(check_points, float)
        v0 = np.max(np.abs(V(pts)))
        v1 = np.max(np.abs(_fd.radial_derivative(V, pts)))
        if v0 > tol or v1 > tol:
            raise ValueError(f"V must satisfy V = dV/dr = 0 on the sphere (got {v0:.2g}, {v1:.2g})")

    def U_hat(x):
        x = np.asarray(x, dtype=float)
        xx = np.sum(x * x, axis=-1)
        out = (xx + 3.0) / 4.0 * U(x) + (1.0 - xx) / 2.0 * np.sum(x * grad_U(x), axis=-1)
        if V is not None:
            out = out + V(x)
        return out

    return U_hat


def fibonacci_sphere(m: int) -> np.ndarray:
    """m roughly uniform unit vectors in R^3."""
    i = np.arange(m) + 0.5
    z = 1.0 - 2.0 * i / m
    phi = pi * (1.0 + 5.0 ** 0.5) * i
    s = np.sqrt(1.0 - z * z)
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=-1)


def fd_biharmonic_residual(U, x, h: float = 5e-3):
    """
    max |Delta^2 U| at x by nested 4th-order differences, and the same
    divided by the scale max(|U|, |Delta U|) over the sample points.
    """
    res = float(np.max(np.abs(_fd.bilaplacian(U, x, h))))
    scale = max(float(np.max(np.abs(U(x)))), float(np.max(np.abs(_fd.laplacian(U, x)))))
    return res, res / scale
