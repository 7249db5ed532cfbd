"""CSV and SVG writers.  Everything is deterministic: no timestamps, fixed formats."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

FMT = "{:.17g}"

ARS_COLUMNS = ("t", "y", "z", "p_y", "p_z")
LIFTED_COLUMNS = ("t", "x", "y", "z", "p_x", "p_y", "p_z")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return FMT.format(float(v))


def write_rows(path, header, rows, fmt: str = "csv") -> Path:
    """Write a table as CSV, or as JSON ``{"columns", "rows"}`` when fmt == "json"."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = path.with_suffix(".json")
        table = [[v if isinstance(v, str) else float(v) for v in row] for row in rows]
        path.write_text(json.dumps({"columns": list(header), "rows": table}) + "\n")
        return path
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_trajectory_csv(path, traj, lifted: bool = False, columns=None, fmt: str = "csv") -> Path:
    """Accepted steps of a trajectory; the state is truncated to the named columns."""
    columns = columns or (LIFTED_COLUMNS if lifted else ARS_COLUMNS)
    n = len(columns) - 1
    rows = ([t, *s[:n]] for t, s in zip(traj.times, traj.states))
    return write_rows(path, columns, rows, fmt)


def write_front_csv(path, points, fmt: str = "csv") -> Path:
    return write_rows(path, ("y", "z", "p_y0", "p_z0", "t"),
                      ([p.y, p.z, p.p_y0, p.p_z0, p.t] for p in points), fmt)


def write_cut_csv(path, points, fmt: str = "csv") -> Path:
    return write_rows(path, ("y", "z", "t", "eta", "branch"),
                      ([p.y, p.z, p.t, p.eta_plus, p.branch] for p in points), fmt)


def write_conjugate_csv(path, points, branch: str, fmt: str = "csv") -> Path:
    rows = []
    for p in points:
        if p is None:
            continue
        rows.append([p.y, p.z, p.t, 1.0 / math.sqrt(abs(p.p_z0)), branch])
    return write_rows(path, ("y", "z", "t", "eta", "branch"), rows, fmt)


def read_csv(path):
    """Header and float matrix (non-numeric columns become NaN)."""
    with Path(path).open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for row in reader:
            vals = []
            for v in row:
                try:
                    vals.append(float(v))
                except ValueError:
                    vals.append(math.nan)
            rows.append(vals)
    return header, np.array(rows)


# Line roles: sphere solid, cut dashed, singular set dotted.
STYLES = {
    "sphere": 'stroke="black" stroke-width="1.6" fill="none"',
    "cut": 'stroke="#b00000" stroke-width="1.4" stroke-dasharray="6,4" fill="none"',
    "singular": 'stroke="#1f4e9c" stroke-width="1.2" stroke-dasharray="1.5,3" fill="none"',
    "conjugate": 'stroke="#2a7d2a" stroke-width="1.0" stroke-dasharray="8,2,2,2" fill="none"',
    "front": 'stroke="#777777" stroke-width="0.8" fill="none"',
    "geodesic": 'stroke="black" stroke-width="1.2" fill="none"',
}
LEGEND = {
    "sphere": "sphere (solid)",
    "cut": "cut locus (dashed)",
    "singular": "singular set Z (dotted)",
    "conjugate": "conjugate locus (dash-dot)",
    "front": "wave front",
    "geodesic": "geodesic",
}


def svg_plot(path, layers: dict, title: str = "", size: int = 520, margin: int = 40,
             labels=("y", "z")) -> Path:
    """Write polylines ``{role: [array (n, 2), ...]}`` with axes and a legend."""
    polys = [(role, np.asarray(p, dtype=float)) for role, items in layers.items() for p in items
             if p is not None and len(p) > 0]
    finite = np.vstack([p[np.all(np.isfinite(p), axis=1)] for _, p in polys] or [np.zeros((1, 2))])
    lo = finite.min(axis=0)
    hi = finite.max(axis=0)
    span = np.where(hi - lo > 0.0, hi - lo, 1.0)
    lo, hi = lo - 0.05 * span, hi + 0.05 * span
    span = hi - lo
    inner = size - 2 * margin

    def tx(p):
        x = margin + (p[:, 0] - lo[0]) / span[0] * inner
        y = size - margin - (p[:, 1] - lo[1]) / span[1] * inner
        return x, y

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size + 60}" '
           f'viewBox="0 0 {size} {size + 60}">',
           f'<rect x="0" y="0" width="{size}" height="{size + 60}" fill="white"/>']
    if title:
        out.append(f'<text x="{size / 2:.1f}" y="20" text-anchor="middle" font-size="14" '
                   f'font-family="sans-serif">{title}</text>')
    ox, oy = tx(np.array([[0.0, 0.0]]))
    if lo[1] <= 0.0 <= hi[1]:
        out.append(f'<line x1="{margin}" y1="{oy[0]:.2f}" x2="{size - margin}" y2="{oy[0]:.2f}" '
                   'stroke="#bbbbbb" stroke-width="0.6"/>')
    if lo[0] <= 0.0 <= hi[0]:
        out.append(f'<line x1="{ox[0]:.2f}" y1="{margin}" x2="{ox[0]:.2f}" y2="{size - margin}" '
                   'stroke="#bbbbbb" stroke-width="0.6"/>')
    out.append(f'<text x="{size - margin + 4}" y="{size - margin + 4}" font-size="12" '
               f'font-family="sans-serif">{labels[0]}</text>')
    out.append(f'<text x="{margin - 4}" y="{margin - 8}" font-size="12" '
               f'font-family="sans-serif">{labels[1]}</text>')
    for role, p in polys:
        p = p[np.all(np.isfinite(p), axis=1)]
        if len(p) < 2:
            continue
        xs, ys = tx(p)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, ys))
        out.append(f'<polyline points="{pts}" {STYLES.get(role, STYLES["front"])}/>')
    roles = [r for r in layers if any(p is not None and len(p) for p in layers[r])]
    for i, role in enumerate(roles):
        y0 = size + 10 + 16 * i
        out.append(f'<line x1="{margin}" y1="{y0}" x2="{margin + 36}" y2="{y0}" '
                   f'{STYLES.get(role, STYLES["front"])}/>')
        out.append(f'<text x="{margin + 44}" y="{y0 + 4}" font-size="11" '
                   f'font-family="sans-serif">{LEGEND.get(role, role)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    return path
