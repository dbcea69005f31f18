"""
How well the L-truncated u_a solves P3 u = -(3/8) u^-5, and why the tail
matters: p3(k) grows like k^3, so a coefficient tail of size |a|^L is
amplified by L^3 in the sup norm.
"""
import numpy as np

from gjms_trace.gjms import (
    energy,
    extremal_spectrum,
    inverse_distance_residual,
    pde_residual,
    projected_pde_residual,
)

print("  |a|    L   sup residual   projected     energy/(-3pi/2) - 1")
for r in (0.5, 0.75, 0.8):
    for L in (32, 64, 96):
        s = extremal_spectrum([0.0, 0.0, r], L)
        print(f"  {r:4.2f} {L:4d}   {pde_residual(s)[1]:.2e}     {projected_pde_residual(s)[1]:.2e}"
              f"    {energy(s) / (-1.5 * np.pi) - 1: .1e}")

# the inverse distance is not a solution away from a = 0
for r in (0.0, 0.3, 0.6):
    print(f"c|x-a|^-1 at |a| = {r}: residual {inverse_distance_residual([0.0, 0.0, r])[0]:.3g}")
