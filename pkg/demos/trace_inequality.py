"""
The n = 3 trace inequality on the unit ball: equality along the conformal
family u_a = |x - a| / sqrt(1 - |a|^2), strict inequality elsewhere.
"""
import numpy as np

from gjms_trace.biharmonic import bulk_energy, extend, trace_deficit_n3
from gjms_trace.gjms import extremal_spectrum
from gjms_trace.sphere_harmonics import HarmonicSpectrum, index, random_positive_spectrum

# the round datum u = 1 extends to U = 1 - (1 - |x|^2)/4
ext = extend(HarmonicSpectrum.constant(8))
print("U(0) =", ext(np.zeros((1, 3)))[0], " int (Lap U)^2 =", bulk_energy(ext), "(3 pi)")

print("\nextremal family, L = 64")
for r in (0.0, 0.25, 0.5, 0.75):
    lhs, rhs, d = trace_deficit_n3(extremal_spectrum([0.0, 0.0, r], 64))
    print(f"  |a| = {r:4.2f}  lhs {lhs: .12f}  rhs {rhs: .12f}  deficit/|rhs| {d / abs(rhs): .1e}")

# perturb off the family: the deficit turns strictly positive
c = HarmonicSpectrum.constant(8).coeffs.copy()
c[index(2, 0)] = 0.3
print("\n1 + 0.3 Y_20: deficit =", trace_deficit_n3(HarmonicSpectrum(8, c))[2])

rng = np.random.default_rng(1)
d = [trace_deficit_n3(random_positive_spectrum(rng, 16))[2] for _ in range(200)]
print("200 random positive u at L = 16: min deficit", min(d))
