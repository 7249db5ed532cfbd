"""
Constants of the small-eta expansion
====================================

Geodesics with large |p_z(0)| = 1/eta^2 stay in a box of size eta x eta^3.
After rescaling, their first correction in eta splits into a part driven
by eps and a part linear in eps', whose coefficients g1, g2, g3 we
integrate up to the cut time s = 2K.
"""

import math

import numpy as np

from ars_tangency import models as md
from ars_tangency.elliptic import K_HALF
from ars_tangency.flow import exp_map
from ars_tangency.perturb import constants_report, expansion_at, j_function

rep = constants_report()
for key, val in rep.items():
    print(f"{key:12s} {val: .12f}")

print()
print("g1(2K) + 2 pi =", rep["g1_2K"] + 2 * math.pi)
print("g2(2K) +   pi =", rep["g2_2K"] + math.pi)
print("Y1(2K) - pi/3 =", rep["Y1_2K"] - math.pi / 3)

# How well does the truncated expansion predict a real geodesic?
m = md.order0(1.0, 0.7)
st = expansion_at(m, 2 * K_HALF)
y1, z1, _, _ = st.first_order(m.epsilon_prime)
print()
print("  eta      y/eta - (Y0 + eta Y1)    z/eta^3 - (Z0 + eta Z1)")
for eta in (0.04, 0.02, 0.01, 0.005):
    y, z = exp_map(m, 1.0, 1 / eta ** 2, 2 * K_HALF * eta, 1e-12)
    print(f"{eta:6.3f}   {y / eta - st.Y0 - eta * y1: .3e}            {z / eta ** 3 - st.Z0 - eta * z1: .3e}")
# the residuals drop by about four per halving: second order, as expected

# j(s) changes sign once in (2K, 4K)
s = np.linspace(0.0, 4 * K_HALF, 9)
print()
print("s/K :", np.round(s / K_HALF, 2))
print("j(s):", np.round(j_function(s), 4))
