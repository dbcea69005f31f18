"""
The third-order fractional GJMS operator P3 on spheres, as a spectral
multiplier, with its energy, Green function and covariance checks.

On S^{n-1}, P3 = (B - 1) B (B + 1) with B = sqrt(-Lap + (n-2)^2/4), so on
degree-k harmonics it multiplies by (k + (n-4)/2)(k + (n-2)/2)(k + n/2).
"""

from __future__ import annotations

from math import pi

import numpy as np

from .conformal import conformal_factor, psi_a, _param
from .sphere_harmonics import (
    HarmonicSpectrum,
    SphereGrid,
    ZonalSpectrum,
    analyze,
    degrees,
    oversampled_grid,
    synthesize,
    zonal_spectrum,
)

POSITIVITY_RATIO = 1e-8


def p3_multiplier(k, n: int = 3):
    k = np.asarray(k, dtype=float)
    return (k + (n - 4) / 2.0) * (k + (n - 2) / 2.0) * (k + n / 2.0)


def apply_p3(spec):
    """P3 applied coefficient-wise; zonal spectra carry their own n."""
    if isinstance(spec, ZonalSpectrum):
        return spec.multiply(lambda k: p3_multiplier(k, spec.n))
    return spec.multiply(lambda k: p3_multiplier(k, 3))


def energy(spec, normalized: bool = False) -> float:
    """
    Raw energy  sum p3(k) u_k^2 = int u P3 u dV.  With normalized=True the
    S^2 value is divided by 4 pi (the mean-value normalization of E[u]).
    """
    if isinstance(spec, ZonalSpectrum):
        n, k = spec.n, np.arange(spec.L + 1)
    else:
        n, k = 3, degrees(spec.L)
    raw = float(np.sum(p3_multiplier(k, n) * spec.coeffs ** 2))
    return raw / (4.0 * pi) if normalized else raw


def energy_form(u: HarmonicSpectrum, v: HarmonicSpectrum, normalized: bool = True) -> float:
    """Bilinear form E[u, v] = (1/4pi) int v P3 u dV."""
    L = max(u.L, v.L)
    pu = apply_p3(u.padded(L))
    raw = float(np.dot(pu.coeffs, v.padded(L).coeffs))
    return raw / (4.0 * pi) if normalized else raw


def energy_bound(u: HarmonicSpectrum, v: HarmonicSpectrum) -> float:
    """
    Cauchy-Schwarz bound for E[u, v] from positivity of P3 off the
    constants:  (E[u] + 3/8 ubar^2)^{1/2} (E[v] + 3/8 vbar^2)^{1/2} - 3/8 ubar vbar.
    """
    ub, vb = u.mean, v.mean
    eu = energy(u, normalized=True) + 0.375 * ub * ub
    ev = energy(v, normalized=True) + 0.375 * vb * vb
    return np.sqrt(max(eu, 0.0) * max(ev, 0.0)) - 0.375 * ub * vb


def green_function_samples(x0, grid: SphereGrid) -> np.ndarray:
    """G_{x0}(x) = -|x - x0| / (2 pi), chordal distance in R^3."""
    x0 = np.asarray(x0, dtype=float)
    if abs(np.linalg.norm(x0) - 1.0) > 1e-12:
        raise ValueError("x0 must be a unit vector")
    return -np.linalg.norm(grid.nodes - x0, axis=-1) / (2.0 * pi)


def green_legendre_coefficient(k):
    """Coefficient c_k in |x - x0| = sum_k c_k P_k(x.x0); -(2k+1) / (2 p3(k))."""
    k = np.asarray(k, dtype=float)
    return -(2.0 * k + 1.0) / (2.0 * p3_multiplier(k, 3))


def green_energy_partial_sum(K: int) -> float:
    """S_K = sum_{k<=K} (2k+1)/p3(k); 4 pi E[G] is the limit, which is 0."""
    if K < 0:
        raise ValueError("K must be >= 0")
    k = np.arange(K + 1, dtype=float)
    return float(np.sum((2.0 * k + 1.0) / p3_multiplier(k, 3)))


def richardson(values, hs, orders=None) -> float:
    """
    Extrapolate values(h) to h = 0 assuming an error series in
    h^orders[0], h^orders[1], ...; default orders 1, 2, 3, ...
    With m values and m-1 orders this solves T_i = T + sum_j c_j h_i^p_j exactly.
    """
    T = np.asarray(values, dtype=float)
    h = np.asarray(hs, dtype=float)
    if orders is None:
        orders = range(1, T.size)
    orders = list(orders)[: T.size - 1]
    # scale h to O(1) so the Vandermonde-type system stays well conditioned
    h = h / np.max(np.abs(h))
    M = np.column_stack([np.ones_like(h)] + [h ** p for p in orders])
    coef = np.linalg.lstsq(M, T, rcond=None)[0]
    return float(coef[0])


def green_energy_limit(K0: int = 64, levels: int = 5) -> float:
    Ks = [K0 * 2 ** j for j in range(levels)]
    return richardson([green_energy_partial_sum(K) for K in Ks], [1.0 / K for K in Ks])


def extremal_legendre_coefficients(r: float, L: int) -> np.ndarray:
    """
    Exact Legendre coefficients of u_a(x) = |x - a| / sqrt(1 - r^2) in the
    variable t = x.a/|a|, where r = |a|.  Uses
    sqrt(1 - 2rt + r^2) = sum_j r^j (r^2/(2j+3) - 1/(2j-1)) P_j(t).
    """
    if not 0.0 <= r < 1.0:
        raise ValueError("need 0 <= r < 1")
    j = np.arange(L + 1, dtype=float)
    return r ** j * (r * r / (2.0 * j + 3.0) - 1.0 / (2.0 * j - 1.0)) / np.sqrt(1.0 - r * r)


def extremal_spectrum(a, L: int) -> HarmonicSpectrum:
    """Band-L spectrum of the S^2 extremal u_a, from the closed form."""
    a = _param(a).a
    if a.size != 3:
        raise ValueError("S^2 extremal needs a in R^3")
    r = float(np.linalg.norm(a))
    axis = a / r if r > 0 else np.array([0.0, 0.0, 1.0])
    return zonal_spectrum(extremal_legendre_coefficients(r, L), axis)


def inverse_distance_residual(a, L: int = 64, oversample: int = 4):
    """
    Residual of the literal candidate w = c|x - a|^-1 in P3 w + (3/8) w^-5 = 0.
    The scale c enters only through lam = (3/8) c^-6 >= 0, chosen by least
    squares on the grid.  Returns (sup relative residual, c).
    """
    a = _param(a).a
    r = float(np.linalg.norm(a))
    axis = a / r if r > 0 else np.array([0.0, 0.0, 1.0])
    spec = zonal_spectrum(r ** np.arange(L + 1, dtype=float), axis)   # generating function
    grid = oversampled_grid(L, oversample)
    w = synthesize(spec, grid)
    _check_positive(w)
    p3w = synthesize(apply_p3(spec), grid)
    q = w ** -5
    lam = max(-float(np.sum(p3w * q)) / float(np.sum(q * q)), 1e-300)
    res = np.max(np.abs(p3w + lam * q)) / np.max(np.abs(p3w))
    return float(res), float((0.375 / lam) ** (1.0 / 6.0))


def _check_positive(samples):
    lo, hi = float(np.min(samples)), float(np.max(np.abs(samples)))
    if not lo > POSITIVITY_RATIO * hi:
        raise ValueError(f"function is not positive on the grid (min {lo:.3g}, max {hi:.3g})")


def pde_residual(spec: HarmonicSpectrum, grid: SphereGrid | None = None, oversample: int = 4):
    """
    Sup-norm residual of P3 u + (3/8) u^-5 on a grid (default 4x
    oversampled).  Returns (absolute, relative to max|P3 u|).
    """
    if grid is None:
        grid = oversampled_grid(spec.L, oversample)
    u = synthesize(spec, grid)
    _check_positive(u)
    p3u = synthesize(apply_p3(spec), grid)
    res = np.max(np.abs(p3u + 0.375 * u ** -5))
    return float(res), float(res / np.max(np.abs(p3u)))


def pde_residual_samples(spec: HarmonicSpectrum, u_exact, grid: SphereGrid | None = None,
                         oversample: int = 4):
    """
    Same residual but with u^-5 taken from the exact callable `u_exact`
    rather than the truncated spectrum; isolates the P3 truncation error.
    """
    if grid is None:
        grid = oversampled_grid(spec.L, oversample)
    u = u_exact(grid.nodes)
    _check_positive(u)
    p3u = synthesize(apply_p3(spec), grid)
    res = np.max(np.abs(p3u + 0.375 * u ** -5))
    return float(res), float(res / np.max(np.abs(p3u)))


def projected_pde_residual(spec: HarmonicSpectrum, oversample: int = 4):
    """
    Residual of the band-limited (Galerkin) equation
    P3 u + (3/8) Proj_L(u^-5) = 0, measured in sup norm on the oversampled
    grid.  Free of the P3 tail error that dominates the pointwise residual.
    """
    grid = oversampled_grid(spec.L, oversample)
    u = synthesize(spec, grid)
    _check_positive(u)
    proj = analyze(u ** -5, grid, spec.L)
    p3u = apply_p3(spec)
    r = synthesize(HarmonicSpectrum(spec.L, p3u.coeffs + 0.375 * proj.coeffs), grid)
    res = float(np.max(np.abs(r)))
    return res, res / float(np.max(np.abs(synthesize(p3u, grid))))


def conformal_action(u, a):
    """
    Push the metric u^-4 g forward by psi_a and return the new conformal
    weight as a callable: u_phi(y) = u(psi_{-a}(y)) * f_{-a}(y)^{-1/2}.
    `u` is a callable on unit vectors.
    """
    a = _param(a)
    minus = -a.a

    def u_phi(y):
        return u(psi_a(minus, y)) * conformal_factor(minus, y) ** -0.5

    return u_phi


def conformal_energy_invariance_check(spec: HarmonicSpectrum, a, L: int | None = None,
                                      oversample: int = 4) -> float:
    """|E[u_phi] - E[u]| / |E[u]| after re-analysis at band limit L."""
    a = _param(a)
    if L is None:
        L = spec.L
    if not np.any(a.a):
        return 0.0
    u_phi = conformal_action(spec.evaluate, a)
    grid = oversampled_grid(L, oversample)
    moved = analyze(u_phi(grid.nodes), grid, L)
    e0 = energy(spec)
    return abs(energy(moved) - e0) / abs(e0)
