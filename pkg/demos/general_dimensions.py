"""
Zonal data on S^{n-1}: the extension operator gives twice P3 in every
dimension, the n >= 5 power inequality and the n = 4 log inequality are
equalities on their extremal families.
"""
import numpy as np

from gjms_trace.biharmonic import b33_multiplier, boundary_operator_b33, extend, q3, trace_deficit_general, trace_deficit_n4
from gjms_trace.conformal import extremal_zonal_spectrum
from gjms_trace.gjms import p3_multiplier

k = np.arange(10)
for n in (3, 5, 6, 7):
    print(f"n = {n}: max |B - 2 p3| = {np.max(np.abs(b33_multiplier(k, n) - 2 * p3_multiplier(k, n))):.1e},"
          f" Q3 = {q3(n)}")

for r in (0.0, 0.4, 0.6):
    _, rhs5, d5 = trace_deficit_general(extremal_zonal_spectrum(5, r, 64))
    _, rhs4, d4 = trace_deficit_n4(extremal_zonal_spectrum(4, r, 64))
    print(f"|a| = {r}: n=5 deficit {d5: .1e} (rhs {rhs5:.4f}), n=4 deficit {d4: .1e}")

# boundary equation of the n = 4 family
s = extremal_zonal_spectrum(4, 0.4, 64)
t = np.linspace(-0.9, 0.9, 5)
u, Bu = s.evaluate(t), boundary_operator_b33(extend(s, 4)).evaluate(t)
print("n = 4: B U + 4 - 4 e^{3u} =", np.max(np.abs(Bu + 4 - 4 * np.exp(3 * u))))
print("       B U + 2 - 2 e^{3u} =", np.max(np.abs(Bu + 2 - 2 * np.exp(3 * u))))
