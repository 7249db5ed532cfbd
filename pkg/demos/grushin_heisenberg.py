"""
Grushin plane and its Heisenberg lift
=====================================

Two textbook structures with closed-form geodesics, used here as checks
for the shooting and conjugate-point machinery. Grushin geodesics from the
origin with p_x = +-1 meet again at p_y t = pi; the first conjugate time
solves p_y t = tan(p_y t). The lifted curves (p_z = 0) in the Heisenberg
group have conjugate points where (p_y t)/2 = tan((p_y t)/2).
"""

import math

import numpy as np

from ars_tangency import closedform as cf
from ars_tangency import models as md
from ars_tangency.flow import conjugate_times, integrate

p_y = 1.0
t = math.pi / p_y
for p_x0 in (1.0, -1.0):
    traj = integrate(md.grushin_rhs, np.array([0.0, 0.0, p_x0, p_y]), t, 1e-12)
    print(f"p_x0 = {p_x0:+.0f}: endpoint {traj.final[:2]}, closed form {cf.grushin_geodesic(p_x0, p_y, t)}")

roots = conjugate_times(md.grushin_rhs, md.grushin_jacobian, [0, 0, 1, p_y], [[0], [0], [0], [1]], 2, 8.0, 1e-12)
print(f"Grushin conjugate time {roots[0]:.12f}  vs root of tan u = u: {cf.tan_fixed_point(1):.12f}")

var = np.zeros((6, 2))
var[4, 0] = var[5, 1] = 1.0
roots = conjugate_times(md.heisenberg_rhs, md.heisenberg_jacobian, [0, 0, 0, 1, p_y, 0], var, 3, 10.0, 1e-12,
                        max_roots=3)
print("Heisenberg det zeros:", np.round(roots, 9))
print(f"  2 pi = {2 * math.pi:.9f} (x returns to 0 and the family refocuses)")
print(f"  2 x root of tan u = u: {cf.heisenberg_tan_conjugate_time(p_y):.9f}")
