"""
Real spherical harmonics on S^2 and zonal harmonics on S^{n-1}.

The basis on S^2 is real and orthonormal against the surface measure dV
(total mass 4*pi).  Coefficients are stored flat, degree k and order m at
index k*k + k + m, with m < 0 holding the sin(|m| phi) part.

Transforms are separable: a longitude DFT per colatitude ring followed by
a Legendre sum per order m, so an L=64 spectrum on a 4x oversampled grid
costs a few milliseconds.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi, sqrt

import numpy as np
from scipy.special import roots_legendre


def n_coeffs(L: int) -> int:
    return (L + 1) ** 2


def index(k: int, m: int) -> int:
    """Flat position of coefficient (k, m)."""
    if abs(m) > k:
        raise ValueError(f"|m| must be <= k, got k={k}, m={m}")
    return k * k + k + m


def degrees(L: int) -> np.ndarray:
    """Degree k of every flat coefficient slot, e.g. for multipliers."""
    return np.repeat(np.arange(L + 1), 2 * np.arange(L + 1) + 1)


def sphere_area(n: int) -> float:
    """|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    # math.gamma is exact to double precision at half-integers
    return 2.0 * pi ** (n / 2) / gamma(n / 2)


# ---------------------------------------------------------------------------
# normalized associated Legendre functions
# ---------------------------------------------------------------------------

def normalized_legendre(L: int, t) -> np.ndarray:
    """
    Table q[k, m, ...] of sqrt((2k+1)/4pi (k-m)!/(k+m)!) P_k^m(t) for
    0 <= m <= k <= L, zero for m > k.

    Uses the fully normalized three-term recurrence, no factorial ratios,
    and drops the Condon-Shortley phase.
    """
    t = np.asarray(t, dtype=float)
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    q = np.zeros((L + 1, L + 1) + t.shape)
    q[0, 0] = 1.0 / sqrt(4.0 * pi)
    for m in range(1, L + 1):
        q[m, m] = sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * q[m - 1, m - 1]
    for m in range(0, L):
        q[m + 1, m] = sqrt(2.0 * m + 3.0) * t * q[m, m]
    for m in range(0, L + 1):
        for k in range(m + 2, L + 1):
            a = sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = sqrt(((k - 1.0) ** 2 - m * m) / (4.0 * (k - 1.0) ** 2 - 1.0))
            q[k, m] = a * (t * q[k - 1, m] - b * q[k - 2, m])
    return q


def legendre_p(k_max: int, t) -> np.ndarray:
    """Unnormalized Legendre polynomials P_0..P_kmax at t, shape (kmax+1, ...)."""
    t = np.asarray(t, dtype=float)
    p = np.zeros((k_max + 1,) + t.shape)
    p[0] = 1.0
    if k_max >= 1:
        p[1] = t
    for k in range(1, k_max):
        p[k + 1] = ((2 * k + 1) * t * p[k] - k * p[k - 1]) / (k + 1)
    return p


def _angles(points):
    points = np.asarray(points, dtype=float)
    r = np.linalg.norm(points, axis=-1)
    r = np.where(r == 0.0, 1.0, r)
    t = np.clip(points[..., 2] / r, -1.0, 1.0)
    phi = np.arctan2(points[..., 1], points[..., 0])
    return t, phi


def real_harmonics(L: int, points) -> np.ndarray:
    """
    Evaluate every basis function Y_{k,m} with k <= L at the directions of
    `points` (shape (..., 3), need not be unit).  Returns (..., (L+1)^2).
    """
    t, phi = _angles(points)
    q = normalized_legendre(L, t)
    out = np.empty(t.shape + (n_coeffs(L),))
    for k in range(L + 1):
        out[..., index(k, 0)] = q[k, 0]
        for m in range(1, k + 1):
            out[..., index(k, m)] = sqrt(2.0) * q[k, m] * np.cos(m * phi)
            out[..., index(k, -m)] = sqrt(2.0) * q[k, m] * np.sin(m * phi)
    return out


# ---------------------------------------------------------------------------
# grid and spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre in cos(colatitude) times uniform longitude."""

    L: int
    t: np.ndarray          # cos(theta) nodes, shape (n_theta,)
    gl_weights: np.ndarray
    phi: np.ndarray        # shape (n_phi,)

    @property
    def n_theta(self) -> int:
        return self.t.size

    @property
    def n_phi(self) -> int:
        return self.phi.size

    @property
    def shape(self):
        return (self.n_theta, self.n_phi)

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.gl_weights, np.full(self.n_phi, 2.0 * pi / self.n_phi))

    @property
    def nodes(self) -> np.ndarray:
        s = np.sqrt(1.0 - self.t ** 2)
        return np.stack(
            [
                np.outer(s, np.cos(self.phi)),
                np.outer(s, np.sin(self.phi)),
                np.outer(self.t, np.ones(self.n_phi)),
            ],
            axis=-1,
        )

    def integrate(self, samples) -> float:
        return float(np.sum(self.weights * samples))


def build_grid(L: int) -> SphereGrid:
    """Minimal grid exact for products of two band-L functions."""
    if L < 0:
        raise ValueError("band limit must be >= 0")
    t, w = roots_legendre(L + 1)
    n_phi = 2 * L + 1
    phi = 2.0 * pi * np.arange(n_phi) / n_phi
    return SphereGrid(L=L, t=t, gl_weights=w, phi=phi)


def oversampled_grid(L: int, factor: int = 4) -> SphereGrid:
    """Grid for non-band-limited integrands such as u^-4 of a band-L u."""
    return build_grid(max(factor, 1) * max(L, 1))


@dataclass(frozen=True)
class HarmonicSpectrum:
    L: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (n_coeffs(self.L),):
            raise ValueError(f"expected {n_coeffs(self.L)} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, L: int) -> "HarmonicSpectrum":
        return cls(L, np.zeros(n_coeffs(L)))

    @classmethod
    def basis(cls, L: int, k: int, m: int) -> "HarmonicSpectrum":
        c = np.zeros(n_coeffs(L))
        c[index(k, m)] = 1.0
        return cls(L, c)

    @classmethod
    def constant(cls, L: int, value: float = 1.0) -> "HarmonicSpectrum":
        c = np.zeros(n_coeffs(L))
        c[0] = value * sqrt(4.0 * pi)
        return cls(L, c)

    def __getitem__(self, km):
        k, m = km
        return self.coeffs[index(k, m)]

    def __add__(self, other: "HarmonicSpectrum") -> "HarmonicSpectrum":
        L = max(self.L, other.L)
        return HarmonicSpectrum(L, self.padded(L).coeffs + other.padded(L).coeffs)

    def __mul__(self, c: float) -> "HarmonicSpectrum":
        return HarmonicSpectrum(self.L, self.coeffs * c)

    __rmul__ = __mul__

    def padded(self, L: int) -> "HarmonicSpectrum":
        """Zero-pad or truncate to band limit L."""
        c = np.zeros(n_coeffs(L))
        n = min(n_coeffs(L), n_coeffs(self.L))
        c[:n] = self.coeffs[:n]
        return HarmonicSpectrum(L, c)

    @property
    def mean(self) -> float:
        """Average over S^2."""
        return self.coeffs[0] / sqrt(4.0 * pi)

    def laplacian_eigenvalues(self) -> np.ndarray:
        k = degrees(self.L)
        return k * (k + 1.0)

    def multiply(self, multiplier) -> "HarmonicSpectrum":
        """Coefficient-wise multiplication by a function of the degree."""
        return HarmonicSpectrum(self.L, self.coeffs * multiplier(degrees(self.L)))

    def evaluate(self, points, chunk: int = 2048) -> np.ndarray:
        """Pointwise synthesis, order by order and in chunks of points."""
        t, phi = _angles(points)
        shape = t.shape
        t, phi = t.ravel(), phi.ravel()
        out = np.empty(t.size)
        L, c = self.L, self.coeffs
        k = np.arange(L + 1)
        for s0 in range(0, t.size, chunk):
            sl = slice(s0, s0 + chunk)
            q = normalized_legendre(L, t[sl])
            acc = c[k * k + k] @ q[:, 0]
            for m in range(1, L + 1):
                km = k[m:]
                cos_part = c[km * km + km + m] @ q[m:, m]
                sin_part = c[km * km + km - m] @ q[m:, m]
                acc = acc + sqrt(2.0) * (cos_part * np.cos(m * phi[sl]) + sin_part * np.sin(m * phi[sl]))
            out[sl] = acc
        return out.reshape(shape)


def _lon_basis(L: int, phi: np.ndarray):
    m = np.arange(L + 1)
    return np.cos(np.outer(phi, m)), np.sin(np.outer(phi, m))


def analyze(samples, grid: SphereGrid, L: int | None = None) -> HarmonicSpectrum:
    """Project grid samples onto the basis up to degree L (default grid.L)."""
    if L is None:
        L = grid.L
    if L > grid.L:
        raise ValueError(f"grid band limit {grid.L} too coarse for L={L}")
    samples = np.asarray(samples, dtype=float)
    if samples.shape != grid.shape:
        raise ValueError(f"samples shape {samples.shape} != grid shape {grid.shape}")
    cos_m, sin_m = _lon_basis(L, grid.phi)
    dphi = 2.0 * pi / grid.n_phi
    # ring Fourier coefficients, weighted by the Gauss weights
    wc = (samples @ cos_m) * dphi * grid.gl_weights[:, None]
    ws = (samples @ sin_m) * dphi * grid.gl_weights[:, None]
    q = normalized_legendre(L, grid.t)
    c = np.zeros(n_coeffs(L))
    for m in range(L + 1):
        qm = q[m:, m]                       # (L+1-m, n_theta)
        ks = np.arange(m, L + 1)
        if m == 0:
            c[ks * ks + ks] = qm @ wc[:, 0]
        else:
            c[ks * ks + ks + m] = sqrt(2.0) * (qm @ wc[:, m])
            c[ks * ks + ks - m] = sqrt(2.0) * (qm @ ws[:, m])
    return HarmonicSpectrum(L, c)


def synthesize(spec: HarmonicSpectrum, grid: SphereGrid) -> np.ndarray:
    L = spec.L
    q = normalized_legendre(L, grid.t)
    fc = np.zeros((grid.n_theta, L + 1))
    fs = np.zeros((grid.n_theta, L + 1))
    for m in range(L + 1):
        ks = np.arange(m, L + 1)
        qm = q[m:, m]
        if m == 0:
            fc[:, 0] = spec.coeffs[ks * ks + ks] @ qm
        else:
            fc[:, m] = sqrt(2.0) * (spec.coeffs[ks * ks + ks + m] @ qm)
            fs[:, m] = sqrt(2.0) * (spec.coeffs[ks * ks + ks - m] @ qm)
    cos_m, sin_m = _lon_basis(L, grid.phi)
    return fc @ cos_m.T + fs @ sin_m.T


def zonal_spectrum(legendre_coeffs, axis) -> HarmonicSpectrum:
    """
    Spectrum of g(x.e) = sum_k g_k P_k(x.e) about the unit axis e, by the
    addition theorem: coefficient (k, m) is g_k 4 pi / (2k+1) Y_{k,m}(e).
    Avoids the quadrature floor of analyze() for known zonal expansions.
    """
    g = np.asarray(legendre_coeffs, dtype=float)
    L = g.size - 1
    ks = degrees(L)
    Y = real_harmonics(L, np.asarray(axis, dtype=float))
    return HarmonicSpectrum(L, g[ks] * 4.0 * pi / (2.0 * ks + 1.0) * Y)


def analyze_function(f, L: int, oversample: int = 4) -> HarmonicSpectrum:
    """Spectrum up to degree L of a callable f(unit vectors (...,3))."""
    grid = oversampled_grid(L, oversample)
    return analyze(f(grid.nodes), grid, L)


def random_spectrum(rng: np.random.Generator, L: int, decay: float = 2.0) -> HarmonicSpectrum:
    """Gaussian coefficients damped by (1+k)^-decay."""
    k = degrees(L)
    return HarmonicSpectrum(L, rng.normal(size=n_coeffs(L)) * (1.0 + k) ** -decay)


def random_positive_spectrum(rng: np.random.Generator, L: int, amplitude: float = 0.3,
                             decay: float = 2.0, floor: float = 0.2) -> HarmonicSpectrum:
    """
    Mean-one spectrum with random higher modes of size ~amplitude; the
    non-constant part is shrunk until min u >= floor on a 4x grid.
    """
    c = random_spectrum(rng, L, decay).coeffs * amplitude
    c[0] = 0.0
    grid = oversampled_grid(L)
    for _ in range(60):
        v = synthesize(HarmonicSpectrum(L, c), grid)
        if 1.0 + np.min(v) >= floor:
            break
        c = 0.5 * c
    c[0] = sqrt(4.0 * pi)
    return HarmonicSpectrum(L, c)


def sobolev_norms(spec: HarmonicSpectrum):
    """(L^2, H^{1/2}, H^1, H^{3/2}) norms, H^s weight lambda_k^s + 1."""
    lam = spec.laplacian_eigenvalues()
    u2 = spec.coeffs ** 2
    l2 = sqrt(np.sum(u2))
    h = [sqrt(np.sum((lam ** s + 1.0) * u2)) for s in (0.5, 1.0, 1.5)]
    return (l2, *h)


def surface_gradient(spec: HarmonicSpectrum, grid: SphereGrid) -> np.ndarray:
    """
    Tangential gradient of a band-limited function at grid nodes, as
    ambient vectors of shape grid.shape + (3,).

    Component i is <grad x_i, grad u> = (Lap(x_i u) - x_i Lap u + 2 x_i u)/2,
    evaluated spectrally; exact since x_i u has band L+1.
    """
    def lap(s):
        return s.multiply(lambda k: -k * (k + 1.0))

    work = build_grid(spec.L + 1)
    u_work = synthesize(spec, work)
    x_work = work.nodes
    x = grid.nodes
    u = synthesize(spec, grid)
    lap_u = synthesize(lap(spec), grid)
    out = np.empty(grid.shape + (3,))
    for i in range(3):
        xu = analyze(x_work[..., i] * u_work, work, spec.L + 1)
        out[..., i] = 0.5 * (synthesize(lap(xu), grid) - x[..., i] * lap_u + 2.0 * x[..., i] * u)
    return out


# ---------------------------------------------------------------------------
# zonal harmonics on S^{n-1}
# ---------------------------------------------------------------------------

def _gegenbauer_offdiag(lam: float, K: int) -> np.ndarray:
    k = np.arange(1, K + 1, dtype=float)
    return 0.5 * np.sqrt(k * (k + 2.0 * lam - 1.0) / ((k + lam) * (k + lam - 1.0)))


def gauss_gegenbauer(n_nodes: int, n: int):
    """
    Nodes and weights for the weight (1-t^2)^{(n-3)/2} on [-1, 1], from the
    eigen-decomposition of the symmetric Jacobi matrix (Golub-Welsch).
    scipy's roots_jacobi/roots_gegenbauer lose ~1e-11 in the endpoint
    weights at a few hundred nodes; this stays near 1e-13.
    """
    if n < 3:
        raise ValueError("zonal analysis needs n >= 3")
    lam = (n - 2) / 2.0
    b = _gegenbauer_offdiag(lam, n_nodes - 1)
    J = np.diag(b, 1) + np.diag(b, -1)
    nodes, vecs = np.linalg.eigh(J)
    mu0 = sqrt(pi) * gamma(lam + 0.5) / gamma(lam + 1.0)
    return nodes, mu0 * vecs[0] ** 2


def zonal_basis(L: int, n: int, t) -> np.ndarray:
    """
    Orthonormal zonal harmonics Z_0..Z_L on S^{n-1} (against dV) as
    functions of t = x.e, shape (L+1, ...).  Z_k is proportional to the
    Gegenbauer polynomial C_k^{(n-2)/2}.
    """
    t = np.asarray(t, dtype=float)
    lam = (n - 2) / 2.0
    b = _gegenbauer_offdiag(lam, max(L, 1))
    mu0 = sqrt(pi) * gamma(lam + 0.5) / gamma(lam + 1.0)
    p = np.zeros((L + 1,) + t.shape)
    p[0] = 1.0 / sqrt(mu0)
    if L >= 1:
        p[1] = t * p[0] / b[0]
    for k in range(1, L):
        p[k + 1] = (t * p[k] - b[k - 1] * p[k - 1]) / b[k]
    return p / sqrt(sphere_area(n - 1))


@dataclass(frozen=True)
class ZonalGrid:
    n: int
    t: np.ndarray
    weights: np.ndarray   # include |S^{n-2}|; sum to |S^{n-1}|

    def integrate(self, samples) -> float:
        return float(np.dot(self.weights, samples))


def zonal_grid(n: int, n_nodes: int) -> ZonalGrid:
    t, w = gauss_gegenbauer(n_nodes, n)
    return ZonalGrid(n=n, t=t, weights=w * sphere_area(n - 1))


@dataclass(frozen=True)
class ZonalSpectrum:
    n: int
    L: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be >= 3")
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.L + 1,):
            raise ValueError(f"expected {self.L + 1} zonal coefficients")
        object.__setattr__(self, "coeffs", c)

    def laplacian_eigenvalues(self) -> np.ndarray:
        k = np.arange(self.L + 1, dtype=float)
        return k * (k + self.n - 2.0)

    def evaluate(self, t) -> np.ndarray:
        return np.tensordot(self.coeffs, zonal_basis(self.L, self.n, t), axes=1)

    @property
    def mean(self) -> float:
        return self.coeffs[0] / sqrt(sphere_area(self.n))

    def multiply(self, multiplier) -> "ZonalSpectrum":
        k = np.arange(self.L + 1)
        return ZonalSpectrum(self.n, self.L, self.coeffs * multiplier(k))


def legendre_expand_zonal(f, n: int, L: int, n_nodes: int | None = None) -> ZonalSpectrum:
    """
    Zonal coefficients c_k = int_{S^{n-1}} f(x.e) Z_k dV by Gauss-Gegenbauer
    quadrature; exact for polynomial f of degree <= n_nodes*2 - 1 - L.
    """
    if n_nodes is None:
        n_nodes = 4 * (L + 1)
    grid = zonal_grid(n, n_nodes)
    Z = zonal_basis(L, n, grid.t)
    return ZonalSpectrum(n, L, Z @ (grid.weights * f(grid.t)))
