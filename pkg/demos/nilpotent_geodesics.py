"""
Nilpotent geodesics at a tangency point
=======================================

The nilpotent model f = y^2/2 integrates in Jacobi elliptic functions.
We compare the closed form with the adaptive integrator, find where the
geodesics come back to the z-axis, and where they lose local optimality.
"""

import math
from pathlib import Path

import numpy as np

from ars_tangency import closedform as cf
from ars_tangency import models as md
from ars_tangency.elliptic import K_HALF
from ars_tangency.flow import first_conjugate_time, shoot
from ars_tangency.output import svg_plot, write_trajectory_csv
from ars_tangency.perturb import j_first_zero

out = Path("demo_output")
m = md.nilpotent()

# A handful of geodesics from the origin, all with p_y(0) = +1
for lam in (0.25, 1.0, 4.0):
    t_end = 4 * K_HALF / math.sqrt(lam)
    traj = shoot(m, 1.0, lam, t_end, 1e-12)
    y, z, _, _ = cf.nilpotent_state(cf.NilpotentGeodesicParams(1.0, lam), traj.times)
    err = np.max(np.abs(traj.states[:, :2] - np.column_stack([y, z])))
    print(f"lambda={lam:5.2f}: {len(traj):4d} steps, closed form vs integrator {err:.1e}")

# Both p_y signs meet again on the z-axis after t = 2K/sqrt(lambda)
lam = 1.0
t_cut = cf.nilpotent_cut_time(lam)
plus = shoot(m, 1.0, lam, 1.4 * t_cut, 1e-12)
minus = shoot(m, -1.0, lam, 1.4 * t_cut, 1e-12)
print("cut time 2K       =", t_cut)
print("endpoints at 2K   =", plus(t_cut)[:2], minus(t_cut)[:2])

# Conjugate time: the first zero of j(s), a little before 3K
s0, jp = j_first_zero()
t_conj = first_conjugate_time(m, 1.0, lam, 4 * K_HALF)
print(f"s0 = {s0:.12f} = {s0 / K_HALF:.6f} K, j'(s0) = {jp:.4f}")
print(f"first conjugate time from the Jacobi fields: {t_conj:.12f}")

y0, z0, _, _ = cf.nilpotent_state(cf.NilpotentGeodesicParams(1.0, 1.0), s0)
print(f"conjugate locus z = alpha |y|^3 with alpha = {z0 / abs(y0) ** 3:.10f}")
print(f"(at s = 3K instead of s0 one gets K/(2 sqrt 2) = {cf.nilpotent_conjugate_coefficient():.10f})")

write_trajectory_csv(out / "nilpotent_plus.csv", plus)
svg_plot(out / "nilpotent_pair.svg",
         {"geodesic": [plus.states[:, :2], minus.states[:, :2]],
          "singular": [np.array([[0.0, -0.2], [0.0, 1.8]])]},
         title="nilpotent geodesics, lambda = 1")
print("wrote", out / "nilpotent_pair.svg")
