"""
Planar integral equation v = (3/16 pi) int |y - z| v^-5 dz, the half-space
kernel extension with kernel sqrt(t^2 + |x - y|^2), and the large-|x|
expansion of w = c int |x - y| f(y) dy.

Quadrature is polar about the evaluation point whenever it lies inside the
integration disk: in those coordinates s^2 f(y + s e) is smooth, so the
kink of |y - z| at z = y costs nothing.  Radial panels are Gauss-Legendre
in s / s_max, graded geometrically toward s = 0 for peaked integrands and
uniform for compact bumps; angles are trapezoidal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy import integrate
from scipy.special import ellipe

from .conformal import BubbleParam, bubble_plane
from .gjms import richardson

PREFACTOR = 3.0 / (16.0 * pi)


@dataclass(frozen=True)
class QuadratureRule:
    n_panels: int = 12
    n_gl: int = 8
    n_phi: int = 64
    sigma_min: float = 1e-3     # innermost panel edge, as a fraction of s_max
    graded: bool = True         # geometric panels toward s = 0, else uniform

    def refined(self, factor: int = 2) -> "QuadratureRule":
        """Same layout with every spacing divided by `factor`."""
        return QuadratureRule(self.n_panels * factor, self.n_gl, self.n_phi * factor,
                              self.sigma_min, self.graded)


@dataclass(frozen=True)
class PlanarField:
    """
    A function on R^2 given as a callable on points (..., 2), integrated
    over the disk |z - center| <= R.  `decay` lists (coef, power) pairs with
    f(z) ~ sum coef |z - center|^-power outside the disk; `compact` marks
    f as vanishing outside the disk.
    """
    func: object
    center: np.ndarray
    R: float
    decay: tuple | None = None
    compact: bool = False
    scale: float = 1.0          # natural length scale (eps for bubbles)

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not self.R > 0:
            raise ValueError("R must be positive")
        if self.compact and self.decay:
            raise ValueError("a compactly supported field has no decay tail")

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=float))

    def samples(self, rule: QuadratureRule = QuadratureRule()):
        """Samples on the polar grid centred at `center`: (points, values)."""
        pts, _, _ = polar_rule(self.center, self.center, self.R, rule)
        return pts, self(pts)


def _gl_panels(rule: QuadratureRule):
    """Nodes and weights in sigma in [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(rule.n_gl)
    if rule.graded:
        edges = np.concatenate([[0.0], np.geomspace(rule.sigma_min, 1.0, rule.n_panels)])
    else:
        edges = np.linspace(0.0, 1.0, rule.n_panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def polar_rule(p, c, R, rule: QuadratureRule):
    """
    Quadrature for the disk |z - c| <= R in polar coordinates about p
    (|p - c| < R).  Returns (points (N, 2), weights (N,) including the
    Jacobian s, radii s (N,)).
    """
    p = np.asarray(p, dtype=float)
    d = p - np.asarray(c, dtype=float)
    dd = float(d @ d)
    if dd >= R * R:
        raise ValueError("polar centre must lie inside the disk")
    phi = 2.0 * pi * np.arange(rule.n_phi) / rule.n_phi
    e = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    de = e @ d
    s_max = -de + np.sqrt(de * de - dd + R * R)
    sig, wsig = _gl_panels(rule)
    s = s_max[:, None] * sig[None, :]
    w = (2.0 * pi / rule.n_phi) * s_max[:, None] * wsig[None, :] * s
    pts = p + s[..., None] * e[:, None, :]
    return pts.reshape(-1, 2), w.ravel(), s.ravel()


def circle_kernel_mean(rho, d):
    """(1/2pi) int_0^{2pi} |y - z| dtheta over |z - c| = rho with |y - c| = d."""
    rho = np.asarray(rho, dtype=float)
    m = 4.0 * rho * d / (rho + d) ** 2
    return 2.0 / pi * (rho + d) * ellipe(m)


def tail_integral(fld: PlanarField, y) -> float:
    """int_{|z-c|>R} |y - z| f(z) dz with f replaced by its decay law."""
    if fld.compact:
        return 0.0
    if fld.decay is None:
        raise ValueError("decay metadata is required for the tail correction")
    if not fld.decay:
        return 0.0
    d = float(np.linalg.norm(np.asarray(y, dtype=float) - fld.center))
    if d >= fld.R:
        raise ValueError("evaluation point must lie inside the truncation disk")

    def integrand(rho):
        f = sum(c * rho ** -p for c, p in fld.decay)
        return 2.0 * pi * rho * circle_kernel_mean(rho, d) * f

    # substitute rho = R / x to map [R, inf) to (0, 1]
    val, _ = integrate.quad(lambda x: integrand(fld.R / x) * fld.R / (x * x), 0.0, 1.0,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return float(val)


def kernel_transform(fld: PlanarField, y, rule: QuadratureRule = QuadratureRule(),
                     tail: bool = True):
    """
    int |y - z| f(z) dz over R^2: disk part by polar quadrature about y,
    exterior by the decay law.  Returns (value, tail estimate).
    """
    y = np.asarray(y, dtype=float)
    pts, w, s = polar_rule(y, fld.center, fld.R, rule)
    inner = float(np.sum(w * s * fld(pts)))
    t = tail_integral(fld, y) if tail else 0.0
    return inner + t, t


def bubble_decay(p: BubbleParam, exponent: float = 5.0, terms: int = 2):
    """
    Expansion of v^-q = (2 eps)^{q/2} (eps^2 + rho^2)^{-q/2} in rho^-1:
    (2eps)^{q/2} [rho^-q - (q/2) eps^2 rho^-(q+2) + ...].
    """
    q = exponent
    lead = (2.0 * p.eps) ** (q / 2.0)
    out = [(lead, q)]
    if terms >= 2:
        out.append((-lead * q / 2.0 * p.eps ** 2, q + 2.0))
    return tuple(out)


def bubble_field(p: BubbleParam, R_factor: float = 100.0, exponent: float = 5.0) -> PlanarField:
    def f(z):
        return bubble_plane(p, z) ** -exponent
    return PlanarField(f, p.center, R_factor * p.eps, bubble_decay(p, exponent), scale=p.eps)


def bubble_sample_points(p: BubbleParam, m: int = 20, radius: float = 5.0, seed: int = 0):
    """m seeded points with |y - y0| <= radius * eps."""
    rng = np.random.default_rng(seed)
    r = radius * p.eps * np.sqrt(rng.uniform(0.0, 1.0, m))
    th = rng.uniform(0.0, 2.0 * pi, m)
    return p.center + np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def integral_residual(p: BubbleParam, points, R_factor: float = 100.0,
                      rule: QuadratureRule = QuadratureRule(), exponent: float = 5.0) -> float:
    """max_y |v(y) - (3/16pi) int |y - z| v^-q dz| / v(y) for the bubble v."""
    fld = bubble_field(p, R_factor, exponent)
    worst = 0.0
    for y in np.atleast_2d(points):
        v = float(bubble_plane(p, y))
        val, _ = kernel_transform(fld, y, rule)
        worst = max(worst, abs(v - PREFACTOR * val) / v)
    return worst


# ---------------------------------------------------------------------------
# half-space extension
# ---------------------------------------------------------------------------

# uniform panels suit bumps that are flat to all orders at their edge
COMPACT_RULE = QuadratureRule(n_panels=24, n_gl=8, n_phi=128, graded=False)


def smooth_bump(center=(0.0, 0.0), radius: float = 1.0, height: float = 1.0) -> PlanarField:
    """C^infinity bump height * exp(1 - 1/(1 - |y-c|^2/radius^2)), compact in the disk."""
    c = np.asarray(center, dtype=float)

    def f(y):
        q = np.sum((y - c) ** 2, axis=-1) / radius ** 2
        out = np.zeros_like(q)
        inside = q < 1.0
        out[inside] = height * np.exp(1.0 - 1.0 / (1.0 - q[inside]))
        return out

    return PlanarField(f, c, radius, compact=True, scale=radius)


def _check_support(fld: PlanarField, tol: float = 1e-10):
    if not fld.compact:
        raise ValueError("half-space extension needs a compactly supported field")
    th = np.linspace(0.0, 2.0 * pi, 64, endpoint=False)
    ring = fld.center + fld.R * np.stack([np.cos(th), np.sin(th)], axis=-1)
    inner = fld.center + 0.5 * fld.R * np.stack([np.cos(th), np.sin(th)], axis=-1)
    ref = max(float(np.max(np.abs(fld(inner)))), float(np.max(np.abs(fld(fld.center[None])))))
    if float(np.max(np.abs(fld(ring)))) > tol * max(ref, 1e-300):
        raise ValueError("field does not vanish on the boundary of its declared support")


def _rule_for(fld: PlanarField, x, rule: QuadratureRule):
    """Polar about x when x is inside the support, else about its centre."""
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x - fld.center) < fld.R * (1.0 - 1e-12):
        return polar_rule(x, fld.center, fld.R, rule)
    return polar_rule(fld.center, fld.center, fld.R, rule)


def halfspace_extend(fld: PlanarField, x, t: float, rule: QuadratureRule = COMPACT_RULE):
    """v(x, t) = (1/4pi) int sqrt(t^2 + |x - y|^2) f(y) dy, t >= 0."""
    _check_support(fld)
    x = np.asarray(x, dtype=float)
    pts, w, _ = _rule_for(fld, x, rule)
    r2 = np.sum((pts - x) ** 2, axis=-1)
    return float(np.sum(w * np.sqrt(t * t + r2) * fld(pts))) / (4.0 * pi)


def halfspace_laplacian(fld: PlanarField, x, t: float, rule: QuadratureRule = COMPACT_RULE):
    """
    Delta_{x,t} v = (1/2pi) int f(y) / sqrt(t^2 + |x-y|^2) dy, from the
    identity Delta |X| = 2/|X| in R^3.
    """
    _check_support(fld)
    x = np.asarray(x, dtype=float)
    pts, w, _ = _rule_for(fld, x, rule)
    r2 = np.sum((pts - x) ** 2, axis=-1)
    return float(np.sum(w * fld(pts) / np.sqrt(t * t + r2))) / (2.0 * pi)


def halfspace_point_function(fld: PlanarField, rule: QuadratureRule = COMPACT_RULE,
                             x_hint=None):
    """
    v as a callable on points (..., 3) = (x1, x2, t), with the quadrature
    nodes frozen once.  Each node contributes a multiple of |X - Y_i|, so
    the discrete field is itself biharmonic off the plane.
    """
    _check_support(fld)
    base = fld.center if x_hint is None else np.asarray(x_hint, dtype=float)
    pts, w, _ = _rule_for(fld, base, rule)
    wf = w * fld(pts) / (4.0 * pi)

    def v(X):
        X = np.asarray(X, dtype=float)
        dx = X[..., None, :2] - pts
        r = np.sqrt(np.sum(dx * dx, axis=-1) + X[..., None, 2] ** 2)
        return r @ wf

    return v


def dt_laplacian_at_boundary(fld: PlanarField, x, h: float = 0.02,
                             rule: QuadratureRule = QuadratureRule(n_panels=24, n_phi=128,
                                                                   sigma_min=1e-4)):
    """
    d/dt Delta v at t = 0+ by the one-sided 4th-order difference
    (-25 A0 + 48 A1 - 36 A2 + 16 A3 - 3 A4) / (12 h), A_j = Delta v(x, j h).
    (Delta v is even in t with a kink at 0, so central differences vanish.)
    """
    h = h * fld.scale
    A = [halfspace_laplacian(fld, x, j * h, rule) for j in range(5)]
    return (-25.0 * A[0] + 48.0 * A[1] - 36.0 * A[2] + 16.0 * A[3] - 3.0 * A[4]) / (12.0 * h)


def dt_at_boundary(fld: PlanarField, x, h: float = 1e-3, rule: QuadratureRule = COMPACT_RULE):
    """d/dt v at t = 0; v is even in t, so the central difference is exact up to h^4."""
    h = h * fld.scale
    return (halfspace_extend(fld, x, h, rule) * 8.0 - halfspace_extend(fld, x, 2 * h, rule)
            - 8.0 * halfspace_extend(fld, x, -h, rule)
            + halfspace_extend(fld, x, -2 * h, rule)) / (12.0 * h)


# ---------------------------------------------------------------------------
# large-|x| expansion
# ---------------------------------------------------------------------------

@dataclass
class AsymptoticFit:
    alpha: float
    b: np.ndarray
    slope: float
    prefactor: float
    mass: float                   # int f
    first_moment: np.ndarray      # int y f
    radii: np.ndarray
    remainders: np.ndarray
    alpha_4pi: float = field(init=False)
    alpha_2pi: float = field(init=False)

    def __post_init__(self):
        self.alpha_4pi = self.mass / (4.0 * pi)
        self.alpha_2pi = self.mass / (2.0 * pi)

    def alpha_match(self):
        """Relative mismatch of the fitted alpha against both closed-form candidates."""
        out = {}
        for name, ref in (("1/(4pi)", self.alpha_4pi), ("1/(2pi)", self.alpha_2pi)):
            out[name] = abs(self.alpha - ref) / abs(ref) if ref != 0 else abs(self.alpha)
        return out


def asymptotic_fit(fld: PlanarField, radii=None, prefactor: float = 1.0 / (4.0 * pi),
                   n_theta: int = 64, rule: QuadratureRule = COMPACT_RULE):
    """
    Fit w(x) = prefactor * int |x - y| f(y) dy  ~  alpha |x| + b.x/|x| + O(1/|x|)
    on rings |x| = R_j.  alpha and b come from Richardson extrapolation in
    1/R over the three outermost rings; the remainder slope is the log-log
    fit of max_theta |w - alpha|x| - b.theta| against R.
    """
    if not fld.compact:
        raise ValueError("asymptotic fit needs a compactly supported f")
    if radii is None:
        radii = fld.R * np.array([4.0, 8.0, 16.0, 32.0, 64.0])
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= fld.R + np.linalg.norm(fld.center)):
        raise ValueError("rings must lie outside the support of f")
    pts, w, _ = polar_rule(fld.center, fld.center, fld.R, rule)
    fw = w * fld(pts)
    mass = float(np.sum(fw))
    moment = fw @ pts
    th = 2.0 * pi * np.arange(n_theta) / n_theta
    e = np.stack([np.cos(th), np.sin(th)], axis=-1)
    W = []
    for R in radii:
        X = R * e
        dist = np.linalg.norm(X[:, None, :] - pts[None], axis=-1)
        W.append(prefactor * dist @ fw)
    W = np.array(W)
    mean = W.mean(axis=1) / radii
    c1 = (W @ e) * (2.0 / n_theta)       # degree-1 angular coefficients
    hs = 1.0 / radii[-3:]
    alpha = richardson(mean[-3:], hs, orders=(1, 2))
    b = np.array([richardson(c1[-3:, i], hs, orders=(1, 2)) for i in range(2)])
    rem = np.max(np.abs(W - alpha * radii[:, None] - (e @ b)[None, :]), axis=1)
    slope = float(np.polyfit(np.log(radii), np.log(rem), 1)[0])
    return AsymptoticFit(alpha=float(alpha), b=b, slope=slope, prefactor=prefactor, mass=mass,
                         first_moment=moment, radii=radii, remainders=rem)
