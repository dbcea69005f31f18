"""
Planar picture: the bubble v = sqrt((eps^2 + |y - y0|^2) / (2 eps)) solves
v = (3/16 pi) int |y - z| v^-5 dz; the half-space kernel extension and the
large-|x| expansion of the logarithmic-type potential.
"""
import numpy as np

from gjms_trace.conformal import BubbleParam, bubble_plane, extremal_sphere_trace, param_change, sphere_to_plane
from gjms_trace.planar import (
    QuadratureRule,
    asymptotic_fit,
    bubble_sample_points,
    dt_laplacian_at_boundary,
    integral_residual,
    smooth_bump,
)

p = BubbleParam(np.zeros(2), 1.0)
pts = bubble_sample_points(p)
coarse = integral_residual(p, pts)
fine = integral_residual(p, pts, rule=QuadratureRule().refined(2))
print(f"integral equation residual {coarse:.2e}, refined {fine:.2e}")
print(f"wrong exponent v^-4: residual {integral_residual(p, pts[:5], exponent=4.0):.2f}")

# the bubble is the stereographic image of u_a
a = np.array([0.1, 0.2, 0.4])
y = np.random.default_rng(0).normal(size=(5, 2))
v = sphere_to_plane(lambda x: extremal_sphere_trace(a, x), y)
print("max |v - bubble(F(a))| =", np.max(np.abs(v - bubble_plane(param_change(a), y))))

f = smooth_bump()
for x in ([0.0, 0.0], [0.5, 0.3]):
    x = np.array(x)
    print(f"d_t Lap v + f at x = {x}: {dt_laplacian_at_boundary(f, x) + f(x[None])[0]: .2e}")

fit = asymptotic_fit(f)
print(f"alpha {fit.alpha:.10f} vs int f / 4pi {fit.alpha_4pi:.10f} (int f / 2pi = {fit.alpha_2pi:.6f})")
print(f"remainder slope {fit.slope:.3f}")
