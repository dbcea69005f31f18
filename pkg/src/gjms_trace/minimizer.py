"""
Minimization of Y3(u) = E[u] ||u^-1||_{L^4}^2 = (1/4pi) S A^{1/2}, with
S = sum p3(k) u_km^2 and A = int u^-4 dV, over positive band-limited u,
plus Kazdan-Warner obstruction integrals.

The variable is the coefficient vector at fixed L.  Positivity is kept by
a sample-minimum guard inside the backtracking line search.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np

from .gjms import apply_p3, p3_multiplier, pde_residual, projected_pde_residual
from .sphere_harmonics import (
    HarmonicSpectrum,
    analyze,
    analyze_function,
    degrees,
    oversampled_grid,
    random_positive_spectrum,
    surface_gradient,
    synthesize,
)

log = logging.getLogger(__name__)

Y3_SPHERE = -0.375 * sqrt(4.0 * pi)     # value at the round metric


@dataclass(frozen=True)
class MinimizeConfig:
    L: int = 16
    oversample: int = 4
    max_iter: int = 500
    tol: float = 1e-15           # stop when the relative decrease falls below this
    grad_tol: float = 1e-9
    delta_min: float = 1e-3      # positivity floor, relative to the sample mean
    boundary_ratio: float = 1e-4
    armijo: float = 1e-4
    shrink: float = 0.5
    step0: float = 1.0
    min_step: float = 1e-14
    precondition: bool = True

    def __post_init__(self):
        if not self.delta_min > 0 or not self.tol > 0:
            raise ValueError("delta_min and tol must be positive")


class PositivityError(ValueError):
    pass


def _samples(spec, oversample):
    grid = oversampled_grid(spec.L, oversample)
    u = synthesize(spec, grid)
    if not np.min(u) > 0:
        raise PositivityError(f"u is not positive on the grid (min {np.min(u):.3g})")
    return grid, u


def _parts(spec, oversample):
    grid, u = _samples(spec, oversample)
    S = float(np.sum(p3_multiplier(degrees(spec.L)) * spec.coeffs ** 2))
    A = grid.integrate(u ** -4.0)
    return grid, u, S, A


def y3_functional(spec: HarmonicSpectrum, oversample: int = 4) -> float:
    _, _, S, A = _parts(spec, oversample)
    return S * sqrt(A) / (4.0 * pi)


def y3_gradient(spec: HarmonicSpectrum, oversample: int = 4) -> np.ndarray:
    """(1/4pi) [2 p3 u sqrt(A) - 2 S A^{-1/2} int u^-5 Y_km]."""
    grid, u, S, A = _parts(spec, oversample)
    m5 = analyze(u ** -5.0, grid, spec.L).coeffs
    p3u = apply_p3(spec).coeffs
    return (2.0 * p3u * sqrt(A) - 2.0 * S / sqrt(A) * m5) / (4.0 * pi)


def fd_gradient(spec: HarmonicSpectrum, h: float = 1e-6, oversample: int = 4, idx=None):
    """Central differences of y3 along the chosen coefficient slots."""
    idx = range(spec.coeffs.size) if idx is None else idx
    out = []
    for j in idx:
        e = np.zeros_like(spec.coeffs)
        e[j] = h
        out.append((y3_functional(HarmonicSpectrum(spec.L, spec.coeffs + e), oversample)
                    - y3_functional(HarmonicSpectrum(spec.L, spec.coeffs - e), oversample))
                   / (2.0 * h))
    return np.array(out)


@dataclass
class MinimizeResult:
    spec: HarmonicSpectrum            # iterate at exit, normalized to mean 1
    value: float
    history: list = field(default_factory=list)
    status: str = "max-iter"
    iterations: int = 0
    multiplier: float = float("nan")  # mu in P3 u = mu Proj(u^-5) before rescaling
    rescaled: HarmonicSpectrum | None = None
    residual: tuple = (float("nan"), float("nan"))
    projected_residual: tuple = (float("nan"), float("nan"))

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def _normalize(c: np.ndarray) -> np.ndarray:
    """Scale to mean one; the functional is scale invariant."""
    return c * (sqrt(4.0 * pi) / c[0])


def minimize_y3(config: MinimizeConfig, initial: HarmonicSpectrum) -> MinimizeResult:
    """
    Preconditioned gradient descent with Armijo backtracking.  Trial steps
    that break positivity (min u below delta_min times the mean) are halved
    like rejected steps.  Aborts with status "boundary-orbit" when
    min u / max u drops below config.boundary_ratio.
    """
    if initial.L != config.L:
        initial = initial.padded(config.L) if initial.L < config.L else \
            HarmonicSpectrum(config.L, initial.coeffs[: (config.L + 1) ** 2])
    c = initial.coeffs
    if not c[0] > 0:
        raise PositivityError("initial mean must be positive")
    c = _normalize(c)
    grid = oversampled_grid(config.L, config.oversample)

    def ok(coeffs):
        u = synthesize(HarmonicSpectrum(config.L, coeffs), grid)
        return np.min(u) > config.delta_min * coeffs[0] / sqrt(4.0 * pi), u

    good, u = ok(c)
    if not good:
        raise PositivityError("initial u is below the positivity floor")
    prec = 1.0 / (1.0 + p3_multiplier(degrees(config.L))) if config.precondition else 1.0
    spec = HarmonicSpectrum(config.L, c)
    f = y3_functional(spec, config.oversample)
    res = MinimizeResult(spec=spec, value=f, history=[f])
    step = config.step0
    for it in range(1, config.max_iter + 1):
        g = y3_gradient(spec, config.oversample)
        g[0] = 0.0                    # radial (scaling) direction is flat
        if np.linalg.norm(g) < config.grad_tol:
            res.status = "converged"
            break
        d = -prec * g
        slope = float(g @ d)
        step = min(2.0 * step, config.step0 * 1e3)
        while True:
            trial = c + step * d
            good, u_t = ok(trial)
            if good:
                f_t = y3_functional(HarmonicSpectrum(config.L, trial), config.oversample)
                if f_t <= f + config.armijo * step * slope:
                    break
            step *= config.shrink
            if step < config.min_step:
                res.status = "step-collapse"
                break
        if res.status == "step-collapse":
            break
        c = _normalize(trial)
        spec = HarmonicSpectrum(config.L, c)
        decrease = f - f_t
        f = f_t
        res.history.append(f)
        res.iterations = it
        ratio = float(np.min(u_t) / np.max(u_t))
        if ratio < config.boundary_ratio:
            res.status = "boundary-orbit"
            log.warning("iterate drifting to the Green-function boundary (min/max %.2e)", ratio)
            break
        if decrease <= config.tol * abs(f):
            res.status = "converged"
            break
    res.spec, res.value = spec, f
    _finish(res, config)
    return res


def _finish(res: MinimizeResult, config: MinimizeConfig):
    """Lagrange multiplier, rescaling to P3 u = -(3/8) u^-5, residual reports."""
    spec = res.spec
    _, _, S, A = _parts(spec, config.oversample)
    mu = S / A
    res.multiplier = mu
    if mu < 0:
        scale = (-0.375 / mu) ** (1.0 / 6.0)
        res.rescaled = spec * scale
        res.residual = pde_residual(res.rescaled, oversample=config.oversample)
        res.projected_residual = projected_pde_residual(res.rescaled, config.oversample)


def random_start(rng: np.random.Generator, L: int = 16, amplitude: float = 0.3,
                 decay: float = 2.0) -> HarmonicSpectrum:
    """Mean-one start with decaying random higher modes, kept positive."""
    return random_positive_spectrum(rng, L, amplitude, decay)


def kw_integral(T, u: HarmonicSpectrum, i: int, oversample: int = 4,
                L_T: int | None = None) -> float:
    """
    int <grad x_i, grad T> u^-4 dV on S^2 for i in {1, 2, 3}.  Since grad T
    is tangent, the integrand is the i-th ambient component of grad T.
    T is a HarmonicSpectrum or a callable on unit vectors.
    """
    if i not in (1, 2, 3):
        raise ValueError("direction i must be 1, 2 or 3")
    if not isinstance(T, HarmonicSpectrum):
        T = analyze_function(T, L_T or max(u.L, 16), oversample)
    grid = oversampled_grid(max(T.L, u.L), oversample)
    uu = synthesize(u, grid)
    if not np.min(uu) > 0:
        raise PositivityError("u is not positive on the grid")
    gT = surface_gradient(T, grid)[..., i - 1]
    return grid.integrate(gT * uu ** -4.0)
