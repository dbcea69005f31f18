from math import pi, sqrt

import numpy as np
import pytest
from scipy.integrate import quad

from gjms_trace.biharmonic import fd_biharmonic_residual
from gjms_trace.conformal import BubbleParam, bubble_plane, extremal_sphere_trace, param_change, sphere_to_plane
from gjms_trace.planar import (
    COMPACT_RULE,
    PREFACTOR,
    PlanarField,
    QuadratureRule,
    asymptotic_fit,
    bubble_field,
    bubble_sample_points,
    circle_kernel_mean,
    dt_at_boundary,
    dt_laplacian_at_boundary,
    halfspace_extend,
    halfspace_laplacian,
    halfspace_point_function,
    integral_residual,
    kernel_transform,
    polar_rule,
    smooth_bump,
    tail_integral,
)

UNIT = BubbleParam(np.zeros(2), 1.0)


def test_field_validation():
    with pytest.raises(ValueError):
        PlanarField(lambda z: z[..., 0], [0, 0], 0.0)
    with pytest.raises(ValueError):
        PlanarField(lambda z: z[..., 0], [0, 0], 1.0, decay=((1.0, 5.0),), compact=True)
    fld = PlanarField(lambda z: np.ones(z.shape[:-1]), [0, 0], 1.0)
    with pytest.raises(ValueError):
        tail_integral(fld, [0.0, 0.0])
    pts, vals = bubble_field(UNIT).samples()
    assert np.all(vals > 0)
    assert np.all(np.linalg.norm(pts, axis=-1) <= 100.0 + 1e-9)


def test_polar_rule_area():
    for p in ([0.0, 0.0], [0.3, -0.5], [0.0, 0.99]):
        _, w, _ = polar_rule(np.array(p), np.zeros(2), 1.0, QuadratureRule())
        assert np.sum(w) == pytest.approx(pi, rel=1e-12)


def test_circle_kernel_mean():
    # (1/2pi) int |rho e - d e1| dphi, against adaptive quadrature
    for rho, d in ((2.0, 0.5), (1.0, 1.0), (0.3, 4.0)):
        ref = quad(lambda p: np.hypot(rho * np.cos(p) - d, rho * np.sin(p)), 0, 2 * pi)[0] / (2 * pi)
        assert circle_kernel_mean(rho, d) == pytest.approx(ref, rel=1e-10)


def test_bubble_value_at_centre():
    val, _ = kernel_transform(bubble_field(UNIT), [0.0, 0.0])
    assert PREFACTOR * val == pytest.approx(sqrt(0.5), abs=1e-4)


def test_radially_symmetric_reduction():
    y = np.array([0.4, -0.2])
    fld = smooth_bump(y, 1.0, 2.0)
    ref = 2 * pi * quad(lambda r: r * r * 2.0 * np.exp(1 - 1 / (1 - r * r)), 0, 1)[0]
    val, tail = kernel_transform(fld, y, COMPACT_RULE)
    assert tail == 0.0
    assert val == pytest.approx(ref, rel=1e-10)


def test_zero_field():
    fld = PlanarField(lambda z: np.zeros(z.shape[:-1]), [0, 0], 3.0, compact=True)
    assert kernel_transform(fld, [0.5, 0.5])[0] == 0.0


def test_integral_residual_and_refinement():
    pts = bubble_sample_points(UNIT)
    assert np.all(np.linalg.norm(pts, axis=-1) <= 5.0)
    coarse = integral_residual(UNIT, pts)
    fine = integral_residual(UNIT, pts, rule=QuadratureRule().refined(2))
    assert coarse <= 1e-3
    assert fine <= coarse / 2


def test_scaling_covariance():
    base = integral_residual(UNIT, bubble_sample_points(UNIT))
    p = BubbleParam(np.array([1.0, 0.0]), 2.0)
    moved = integral_residual(p, bubble_sample_points(p))
    assert moved <= 2 * max(base, 1e-12) and moved <= 1e-3


def test_wrong_exponent_is_rejected():
    pts = bubble_sample_points(UNIT, m=5)
    assert integral_residual(UNIT, pts, exponent=4.0) > 0.1


def test_tail_consistency(rng):
    p = BubbleParam(np.array([0.2, -0.1]), 0.7)
    near = bubble_field(p, 50.0)
    far = bubble_field(p, 100.0)
    for y in bubble_sample_points(p, 20, seed=3):
        v1, t1 = kernel_transform(near, y)
        v2, _ = kernel_transform(far, y)
        assert abs(v2 - v1) < abs(t1)


def test_transfer_to_plane(rng):
    a = np.array([0.2, -0.4, 0.5])
    y = rng.normal(size=(100, 2)) * 3
    v = sphere_to_plane(lambda x: extremal_sphere_trace(a, x), y)
    assert np.allclose(v, bubble_plane(param_change(a), y), rtol=1e-10)


BUMP = smooth_bump((0.1, -0.2), 1.0, 1.0)


def test_halfspace_requires_compact_support():
    with pytest.raises(ValueError):
        halfspace_extend(bubble_field(UNIT), [0, 0], 0.5)
    leaky = PlanarField(lambda z: np.ones(z.shape[:-1]), [0, 0], 1.0, compact=True)
    with pytest.raises(ValueError):
        halfspace_extend(leaky, [0, 0], 0.5)


def test_halfspace_laplacian_matches_fd():
    x, t, h = np.array([0.3, 0.1]), 0.6, 1e-2
    v = lambda X: np.array([halfspace_extend(BUMP, X[:2], X[2]) for X in np.atleast_2d(X)])
    X0 = np.append(x, t)
    lap = 0.0
    for i in range(3):
        e = np.eye(3)[i] * h
        lap += (-v(X0 + 2 * e) + 16 * v(X0 + e) - 30 * v(X0) + 16 * v(X0 - e) - v(X0 - 2 * e))[0] / (12 * h * h)
    assert lap == pytest.approx(halfspace_laplacian(BUMP, x, t), rel=1e-6)


def test_halfspace_boundary_conditions(rng):
    fmax = 1.0
    xs = np.vstack([[0.1, -0.2], BUMP.center + 0.7 * rng.uniform(-1, 1, size=(5, 2))])
    for x in xs:
        assert abs(dt_at_boundary(BUMP, x)) < 1e-10
        err = abs(dt_laplacian_at_boundary(BUMP, x) + float(BUMP(x[None])[0]))
        assert err <= 1e-3 * fmax


def test_halfspace_biharmonic_interior(rng):
    v = halfspace_point_function(BUMP)
    X = np.column_stack([rng.uniform(-1, 1, size=(10, 2)), rng.uniform(0.5, 1.5, 10)])
    _, rel = fd_biharmonic_residual(v, X, h=0.05)
    assert rel <= 1e-4
    direct = np.array([halfspace_extend(BUMP, p[:2], p[2]) for p in X])
    assert np.allclose(v(X), direct, rtol=1e-12)


def test_asymptotic_fit_bump():
    fit = asymptotic_fit(BUMP)
    assert fit.alpha == pytest.approx(fit.mass / (4 * pi), rel=1e-3)
    assert -1.3 <= fit.slope <= -0.7
    m = fit.alpha_match()
    assert m["1/(4pi)"] < 1e-3 and m["1/(2pi)"] > 0.4
    # mass by 1D quadrature
    ref = 2 * pi * quad(lambda r: r * np.exp(1 - 1 / (1 - r * r)), 0, 1)[0]
    assert fit.mass == pytest.approx(ref, rel=1e-10)


def test_asymptotic_fit_odd():
    g = smooth_bump((0.0, 0.0), 1.0, 1.0)
    odd = PlanarField(lambda y: y[..., 0] * g(y), g.center, 1.0, compact=True)
    M = 2 * pi * quad(lambda r: r ** 3 / 2 * np.exp(1 - 1 / (1 - r * r)), 0, 1)[0]
    fit = asymptotic_fit(odd, prefactor=1 / (2 * pi))
    assert fit.first_moment[0] == pytest.approx(M, rel=1e-10)
    assert fit.b[0] == pytest.approx(-M / (2 * pi), rel=1e-2)
    assert abs(fit.b[1]) < 1e-2 * abs(fit.b[0])


def test_asymptotic_fit_radial_has_no_dipole():
    fit = asymptotic_fit(smooth_bump((0.0, 0.0), 1.0, 1.0))
    assert np.all(np.abs(fit.b) < 1e-6)


def test_asymptotic_fit_rejects_noncompact():
    with pytest.raises(ValueError):
        asymptotic_fit(bubble_field(UNIT))
    with pytest.raises(ValueError):
        asymptotic_fit(BUMP, radii=[0.5, 1.0, 2.0])


def test_bubble_dipole_matches_trace_expansion():
    # f = (3/4) v^-5 gives v = (1/4pi) int |x-y| f + C, so alpha = int f / 4pi and
    # b = -(1/4pi) int y f; the expansion of v itself has alpha = 1/sqrt(2 eps),
    # a = -y0 / sqrt(2 eps)
    p = BubbleParam(np.array([0.4, -0.3]), 0.5)
    fld = bubble_field(p, 400.0)
    pts, w, _ = polar_rule(p.center, p.center, fld.R, QuadratureRule(n_panels=24))
    fw = 0.75 * w * fld(pts)
    alpha = np.sum(fw) / (4 * pi)
    b = -(fw @ pts) / (4 * pi)
    assert alpha == pytest.approx(1 / sqrt(2 * p.eps), rel=1e-6)
    assert np.allclose(b, -p.center / sqrt(2 * p.eps), rtol=1e-6)
