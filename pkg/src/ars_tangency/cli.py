"""Command-line front end: ``ars-tangency {geodesic, locus, perturb-constants, verify}``.

Settings are merged as built-in defaults < ARS_TOL < ``--config`` file < flags
given on the command line.  Exit status is 2 for usage errors and 1 for
numerical failures or a failed ``verify``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import closedform as cf
from . import models as md
from . import output
from .acceptance import ACCEPT_TOL, run_acceptance
from .flow import IntegrationError, ars_energy, integrate, shoot
from .loci import (
    CUT_TOL,
    ConvergenceError,
    compute_front,
    conjugate_locus,
    cut_locus,
    fit_cusp,
    log_pz_grid,
    sphere,
)
from .perturb import constants_report, j_first_zero, matched_cut_coefficient, predicted_cut_point

BUILTIN_MODELS = ("nilpotent", "order0", "grushin")
GEODESIC_TOL = 1e-10

DEFAULTS = {
    "model": "nilpotent",
    "model_file": None,
    "epsilon": None,
    "epsilon_prime": None,
    "tol": None,
    "output_dir": ".",
    "format": "csv",
    "plot": False,
    "lifted": False,
    "py": None,
    "pz": None,
    "t": None,
    "r": None,
    "eta0": None,
    "pz_min": 0.1,
    "pz_max": 1.0e4,
    "n": 200,
    "resolution": 100,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    model: object
    tol: float
    output_dir: Path
    format: str = "csv"
    plot: bool = False

    def __post_init__(self):
        if not 0.0 < self.tol <= 1e-4:
            raise UsageError(f"tol must lie in (0, 1e-4], got {self.tol}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        self.output_dir = Path(self.output_dir)
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise UsageError(f"output directory {self.output_dir} is not writable: {exc}") from None
        if not os.access(self.output_dir, os.W_OK):
            raise UsageError(f"output directory {self.output_dir} is not writable")

    def path(self, stem: str) -> Path:
        return self.output_dir / f"{stem}.{self.format}"


def parse_range(text) -> list:
    """``start:step:count`` (or a single number) to a list of positive floats."""
    if isinstance(text, (int, float)):
        vals = [float(text)]
    elif isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        parts = str(text).split(":")
        try:
            if len(parts) == 1:
                vals = [float(parts[0])]
            elif len(parts) == 3:
                start, step, count = float(parts[0]), float(parts[1]), int(parts[2])
                if count < 1:
                    raise UsageError("range count must be at least 1")
                vals = [start + i * step for i in range(count)]
            else:
                raise UsageError(f"expected start:step:count, got {text!r}")
        except ValueError:
            raise UsageError(f"cannot parse range {text!r}") from None
    if not all(v > 0.0 and math.isfinite(v) for v in vals):
        raise UsageError(f"range values must be positive, got {vals}")
    return vals


def _add_common(p):
    p.add_argument("--model", choices=BUILTIN_MODELS, help="builtin model")
    p.add_argument("--model-file", help="JSON model file {name, epsilon, epsilon_prime, higher_terms}")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--epsilon-prime", type=float)
    p.add_argument("--tol", type=float, help="integration tolerance (default: ARS_TOL or per command)")
    p.add_argument("--output-dir")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--plot", action="store_true", default=None, help="also write an SVG plot")
    p.add_argument("--config", help="JSON file of settings; explicit flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ars-tangency", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geodesic", help="integrate one geodesic from the origin")
    _add_common(g)
    g.add_argument("--py", type=float, help="p_y(0) (+1 or -1); p_x(0) for grushin")
    g.add_argument("--pz", type=float, help="p_z(0); p_y for grushin")
    g.add_argument("--t", type=float, help="final time")
    g.add_argument("--lifted", action="store_true", default=None,
                   help="integrate the desingularized flow with p_x = 0")

    loc = sub.add_parser("locus", help="fronts, spheres, cut and conjugate loci")
    loc.add_argument("kind", choices=("front", "sphere", "cut", "conjugate"))
    _add_common(loc)
    loc.add_argument("--t", type=float, help="front time")
    loc.add_argument("--r", type=float, help="sphere radius")
    loc.add_argument("--eta0", help="start:step:count, or one value")
    loc.add_argument("--pz-min", type=float)
    loc.add_argument("--pz-max", type=float)
    loc.add_argument("--n", type=int, help="front samples per sign")
    loc.add_argument("--resolution", type=int, help="sphere points per quarter arc")

    pc = sub.add_parser("perturb-constants", help="K, s0, g1, g2, g3, Y1, Z1 at 2K as JSON")
    _add_common(pc)

    v = sub.add_parser("verify", help="run the acceptance suite")
    _add_common(v)
    return parser


def merge_settings(args: argparse.Namespace, environ=None) -> dict:
    """Defaults < ARS_TOL < config file < explicit flags."""
    environ = os.environ if environ is None else environ
    settings = dict(DEFAULTS)
    if environ.get("ARS_TOL"):
        try:
            settings["tol"] = float(environ["ARS_TOL"])
        except ValueError:
            raise UsageError(f"ARS_TOL is not a number: {environ['ARS_TOL']!r}") from None
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in settings:
                raise UsageError(f"unknown config key {key!r}")
            settings[key] = value
    for key, value in vars(args).items():
        if key in settings and value is not None:
            settings[key] = value
    return settings


def resolve_model(s: dict):
    if s["model_file"]:
        try:
            return md.ArsModel.load(s["model_file"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"bad model file {s['model_file']}: {exc}") from None
    name = s["model"]
    if name not in BUILTIN_MODELS:
        raise UsageError(f"unknown model {name!r}")
    eps, epp = s["epsilon"], s["epsilon_prime"]
    if name == "order0":
        return md.order0(1.0 if eps is None else float(eps), 0.0 if epp is None else float(epp))
    if eps not in (None, 0.0) or epp not in (None, 0.0):
        raise UsageError(f"--epsilon/--epsilon-prime only apply to order0, not {name}")
    return md.nilpotent() if name == "nilpotent" else "grushin"


def make_config(s: dict, default_tol: float) -> RunConfig:
    tol = default_tol if s["tol"] is None else float(s["tol"])
    return RunConfig(resolve_model(s), tol, s["output_dir"], s["format"], bool(s["plot"]))


def _require(s: dict, *keys):
    missing = [k for k in keys if s.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _singular_polyline(m, y_lo, y_hi, z_lo, z_hi):
    if m.epsilon == 0.0:
        return np.array([[0.0, z_lo], [0.0, z_hi]])
    ys = np.linspace(y_lo, y_hi, 201)
    pts = [(y, md.singular_set_z(m, y)) for y in ys]
    pts = np.array([p for p in pts if p[1] is not None and z_lo <= p[1] <= z_hi])
    return pts if len(pts) > 1 else None


def _bounds(*arrays):
    pts = np.vstack([a for a in arrays if a is not None and len(a)])
    return pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max()


def cmd_geodesic(cfg: RunConfig, p_y0: float, p_z0: float, t_end: float, lifted: bool = False) -> list:
    if not t_end > 0.0:
        raise UsageError("--t must be positive")
    m = cfg.model
    if m == "grushin":
        traj = integrate(md.grushin_rhs, np.array([0.0, 0.0, p_y0, p_z0]), t_end, cfg.tol,
                         model_name="grushin")
        cols, drift = ("t", "x", "y", "p_x", "p_y"), traj.drift(md.grushin_hamiltonian)
        xy = traj.states[:, :2]
    elif lifted:
        if m.higher_terms:
            raise UsageError("--lifted supports the order-0 family only")
        traj = integrate(lambda s: md.lifted_rhs_order0(m, s),
                         np.array([0.0, 0.0, 0.0, 0.0, p_y0, p_z0]), t_end, cfg.tol,
                         atol=0.01 * cfg.tol, model_name=f"{m.name}:lifted")
        cols, drift = output.LIFTED_COLUMNS, traj.drift(lambda s: md.lifted_hamiltonian(m, s))
        xy = traj.states[:, 1:3]
    else:
        try:
            traj = shoot(m, p_y0, p_z0, t_end, cfg.tol)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        cols, drift = output.ARS_COLUMNS, traj.drift(ars_energy(m))
        xy = traj.states[:, :2]
    files = [output.write_trajectory_csv(cfg.path("geodesic"), traj, columns=cols, fmt=cfg.format)]
    if cfg.plot:
        labels = ("x", "y") if m == "grushin" else ("y", "z")
        files.append(output.svg_plot(cfg.output_dir / "geodesic.svg", {"geodesic": [xy]},
                                     title=f"geodesic p=({p_y0:g}, {p_z0:g}), t={t_end:g}", labels=labels))
    final = ", ".join(f"{c}={v:.10g}" for c, v in zip(cols, [traj.times[-1], *traj.final]))
    print(f"final: {final}")
    print(f"steps: {len(traj)}  energy drift: {drift:.3e}")
    return files


def _locus_front(cfg, m, s):
    _require(s, "t")
    grid = log_pz_grid(float(s["pz_min"]), float(s["pz_max"]), int(s["n"]))
    pts = compute_front(m, float(s["t"]), grid, tol=cfg.tol)
    files = [output.write_front_csv(cfg.path("front"), pts, cfg.format)]
    bad = sum(not p.ok for p in pts)
    print(f"front at t={s['t']}: {len(pts)} points, {bad} failed")
    if cfg.plot:
        arrays = []
        for sign in (1.0, -1.0):
            for sz in (1.0, -1.0):
                arc = [(p.p_z0, p.y, p.z) for p in pts if p.p_y0 == sign and np.sign(p.p_z0) == sz and p.ok]
                arc.sort()
                if arc:
                    arrays.append(np.array(arc)[:, 1:])
        files.append(output.svg_plot(cfg.output_dir / "front.svg", {"front": arrays},
                                     title=f"front t={s['t']:g}"))
    return files


def _locus_sphere(cfg, m, s):
    _require(s, "r")
    sph = sphere(m, float(s["r"]), int(s["resolution"]), cfg.tol)
    files = [output.write_rows(cfg.path("sphere"), ("y", "z"), sph.points, cfg.format)]
    if sph.corners:
        files.append(output.write_cut_csv(cfg.path("sphere_corners"), sph.corners, cfg.format))
    refl = sph.points * np.array([-1.0, 1.0])
    dist = np.sqrt(((refl[:, None, :] - sph.points[None, :, :]) ** 2).sum(axis=2)).min(axis=1).max()
    print(f"sphere r={s['r']}: {len(sph.points)} points, matched={sph.matched}, "
          f"y-reflection mismatch {dist:.3e}")
    for c in sph.corners:
        print(f"  {c.branch} corner: y={c.y:.10g} z={c.z:.10g} gap={c.residual:.2e}")
    if cfg.plot:
        cut = []
        for c in sph.corners:
            etas = np.linspace(0.1, 1.0, 10) * c.eta_plus
            try:
                pts = cut_locus(m, etas[::-1], c.branch, cfg.tol)
                cut.append(np.array([[0.0, 0.0]] + [[p.y, p.z] for p in pts[::-1]]))
            except ConvergenceError:
                pass
        y_lo, y_hi, z_lo, z_hi = _bounds(sph.points)
        files.append(output.svg_plot(cfg.output_dir / "sphere.svg", {
            "sphere": [sph.points], "cut": cut,
            "singular": [_singular_polyline(m, y_lo, y_hi, z_lo, z_hi)],
        }, title=f"sphere r={s['r']:g}"))
    return files


def _locus_cut(cfg, m, s):
    etas = parse_range(s["eta0"] if s["eta0"] is not None else "0.08:-0.02:4")
    if m.epsilon == 0.0:
        raise UsageError("the cut locus construction needs epsilon != 0 (use --model order0)")
    order = sorted(etas)
    files, report, polys = [], {}, []
    for branch in ("upper", "lower"):
        pts = cut_locus(m, order, branch, cfg.tol)
        files.append(output.write_cut_csv(cfg.path(f"cut_{branch}"), pts, cfg.format))
        yz = np.array([[p.y, p.z] for p in pts])
        polys.append(np.vstack([[0.0, 0.0], yz]))
        entry = {"points": len(pts), "max_gap": max(p.residual for p in pts)}
        small = pts[0]
        entry["y_over_eta0_sq_smallest"] = small.y / small.eta_plus ** 2
        entry["predicted"] = predicted_cut_point(m, small.eta_plus, branch)[0] / small.eta_plus ** 2
        entry["matched_coefficient"] = matched_cut_coefficient(m)
        entry["f1_sign"] = small.f_sign
        if len(pts) >= 4:
            try:
                entry["exponent"], _ = fit_cusp(yz)
                entry["alpha"] = fit_cusp(yz, exponent=1.5)[1]
            except ValueError as exc:
                entry["fit_error"] = str(exc)
        report[branch] = entry
    if "alpha" in report["upper"] and "alpha" in report["lower"]:
        report["alpha_ratio"] = report["upper"]["alpha"] / report["lower"]["alpha"]
    print(json.dumps(report, indent=2, sort_keys=True))
    rep = cfg.output_dir / "cut_report.json"
    rep.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    files.append(rep)
    if cfg.plot:
        y_lo, y_hi, z_lo, z_hi = _bounds(*polys)
        files.append(output.svg_plot(cfg.output_dir / "cut.svg", {
            "cut": polys, "singular": [_singular_polyline(m, y_lo, y_hi, z_lo, z_hi)],
        }, title="cut locus"))
    return files


def _locus_conjugate(cfg, m, s):
    etas = parse_range(s["eta0"] if s["eta0"] is not None else "0.05:0.05:8")
    loc = conjugate_locus(m, etas, cfg.tol)
    files, report, polys = [], {}, []
    for branch in ("upper", "lower"):
        pts = [p for key in ((1, branch), (-1, branch)) for p in loc[key] if p is not None]
        files.append(output.write_conjugate_csv(cfg.path(f"conjugate_{branch}"), pts, branch, cfg.format))
        for p_y0 in (1, -1):
            arc = sorted((abs(p.y), p.y, p.z) for p in loc[(p_y0, branch)] if p is not None)
            if arc:
                polys.append(np.vstack([[0.0, 0.0], np.array(arc)[:, 1:]]))
        entry = {"points": len(pts)}
        if len(pts) >= 4:
            yz = np.array([[p.y, p.z] for p in pts])
            try:
                entry["exponent"], _ = fit_cusp(yz)
                entry["alpha"] = fit_cusp(yz, exponent=3.0)[1]
            except ValueError as exc:
                entry["fit_error"] = str(exc)
        report[branch] = entry
    s0, _ = j_first_zero()
    y0, z0, _ = cf.nilpotent_state(cf.NilpotentGeodesicParams(1.0, 1.0), s0)[:3]
    report["nilpotent_alpha_exact"] = float(z0 / abs(y0) ** 3)
    report["nilpotent_alpha_K_over_2sqrt2"] = cf.nilpotent_conjugate_coefficient()
    print(json.dumps(report, indent=2, sort_keys=True))
    rep = cfg.output_dir / "conjugate_report.json"
    rep.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    files.append(rep)
    if cfg.plot:
        files.append(output.svg_plot(cfg.output_dir / "conjugate.svg", {"conjugate": polys},
                                     title="conjugate locus"))
    return files


def cmd_locus(cfg: RunConfig, kind: str, s: dict) -> list:
    if cfg.model == "grushin":
        raise UsageError("locus commands need a tangency model (nilpotent, order0 or a model file)")
    handler = {"front": _locus_front, "sphere": _locus_sphere, "cut": _locus_cut,
               "conjugate": _locus_conjugate}[kind]
    return handler(cfg, cfg.model, s)


def cmd_perturb_constants(cfg: RunConfig) -> dict:
    m = cfg.model if isinstance(cfg.model, md.ArsModel) and cfg.model.epsilon != 0.0 else None
    rep = constants_report(m)
    text = json.dumps(rep, indent=2, sort_keys=True)
    print(text)
    (cfg.output_dir / "perturb_constants.json").write_text(text + "\n")
    return rep


def cmd_verify(cfg: RunConfig) -> bool:
    report = run_acceptance(cfg.tol, echo=print)
    (cfg.output_dir / "verify_report.json").write_text(report.to_json() + "\n")
    c = report.constants
    print(f"g1_2K={c['g1_2K']:.10g}  s0/K={c['s0_over_K']:.10g}  "
          f"grushin conjugate root={c['grushin_conjugate_root']:.10g}")
    print(f"{'ALL PASS' if report.passed else 'FAILED'} in {report.runtime:.1f}s")
    return report.passed


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        s = merge_settings(args)
        if args.command == "geodesic":
            _require(s, "py", "pz", "t")
            cfg = make_config(s, GEODESIC_TOL)
            cmd_geodesic(cfg, float(s["py"]), float(s["pz"]), float(s["t"]), bool(s["lifted"]))
        elif args.command == "locus":
            cfg = make_config(s, CUT_TOL)
            cmd_locus(cfg, args.kind, s)
        elif args.command == "perturb-constants":
            cmd_perturb_constants(make_config(s, GEODESIC_TOL))
        else:
            return 0 if cmd_verify(make_config(s, ACCEPT_TOL)) else 1
    except UsageError as exc:
        parser.error(str(exc))
    except (IntegrationError, ConvergenceError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
