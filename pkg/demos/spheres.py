"""
Small spheres
=============

The sphere of radius r is the part of the front at time r that is still
optimal: pruning the front at the two matched cut pairs leaves a closed
curve with two corners. With eps' = 0 the picture is symmetric under
y -> -y; eps' != 0 tilts both corners to one side.
"""

from pathlib import Path

import numpy as np

from ars_tangency import models as md
from ars_tangency.loci import cut_locus, polyline_self_intersections, sphere
from ars_tangency.output import svg_plot

out = Path("demo_output")
r = 0.3

for epp in (0.0, 1.0):
    m = md.order0(1.0, epp)
    sph = sphere(m, r, resolution=60)
    pts = sph.points
    mirror = np.min(np.hypot(*(pts[:, None, :] * [-1, 1] - pts[None]).transpose(2, 0, 1)), axis=1).max()
    print(f"eps' = {epp}: {len(pts)} points, matched = {sph.matched}, "
          f"self-crossings = {len(polyline_self_intersections(pts))}, mirror mismatch = {mirror:.2e}")
    for c in sph.corners:
        print(f"   {c.branch:5s} corner at ({c.y: .3e}, {c.z: .3e}), eta+ = {c.eta_plus:.4f}, eta- = {c.eta_minus:.4f}")

    # the cut locus up to the corners
    cut = []
    for c in sph.corners:
        etas = np.linspace(c.eta_plus, 0.1 * c.eta_plus, 8)
        cut.append(np.array([[0.0, 0.0]] + [[p.y, p.z] for p in cut_locus(m, etas, c.branch)[::-1]]))
    y = np.linspace(pts[:, 0].min(), pts[:, 0].max(), 200)
    z_sing = -(y ** 2 / 2 + epp * y ** 3)
    keep = (z_sing > pts[:, 1].min()) & (z_sing < pts[:, 1].max())
    svg_plot(out / f"sphere_epp{epp:g}.svg",
             {"sphere": [pts], "cut": cut, "singular": [np.column_stack([y, z_sing])[keep]]},
             title=f"sphere r = {r}, eps = 1, eps' = {epp:g}")
print("SVGs in", out)
