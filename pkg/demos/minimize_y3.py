"""
Minimizing E[u] ||u^-1||_{L^4}^2 over positive spectra at L = 16.  Every
start lands on the round value -(3/8) sqrt(4 pi), up to a conformal move.
"""
import numpy as np

from gjms_trace.minimizer import Y3_SPHERE, MinimizeConfig, kw_integral, minimize_y3, random_start
from gjms_trace.sphere_harmonics import HarmonicSpectrum

cfg = MinimizeConfig(L=16)
for seed in range(5):
    res = minimize_y3(cfg, random_start(np.random.default_rng(seed), 16))
    print(f"seed {seed}: {res.status:9s} it {res.iterations:3d}  Y3 {res.value:.12f}"
          f"  err {res.value - Y3_SPHERE: .1e}  mu {res.multiplier:.4f}  residual {res.residual[1]:.1e}")

one = HarmonicSpectrum.constant(16)
print("\nint <grad x_i, grad x3> dV:", [round(kw_integral(lambda x: x[..., 2], one, i), 12) for i in (1, 2, 3)],
      " (8 pi/3 =", 8 * np.pi / 3, ")")
