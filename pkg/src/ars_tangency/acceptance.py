"""Acceptance suite: nine numbered criteria with their tolerances and time budgets.

Each ``criterion_N(ctx)`` returns a :class:`CriterionResult`; ``run_acceptance``
runs them in order and criterion 9 audits the Hamiltonian drift of every
trajectory the others integrated.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import closedform as cf
from . import models as md
from .elliptic import K_HALF, complete_K, jacobi
from .flow import (
    ars_energy,
    conjugate_times,
    first_conjugate_time,
    integrate,
    shoot,
    sign_change_roots,
)
from .loci import CUT_TOL, cut_locus, fit_cusp, sphere
from .perturb import constants_report, expansion_at, g_constants, j_first_zero

ACCEPT_TOL = 1e-12
CUT_ETAS = (0.08, 0.06, 0.04, 0.02)
SYMMETRIC_ETAS = (0.05, 0.04, 0.03, 0.02)
LAMBDAS = (0.25, 1.0, 4.0, 25.0)


@dataclass
class Check:
    value: float
    target: str
    ok: bool


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: dict = field(default_factory=dict)
    runtime: float = 0.0
    budget: float | None = None
    notes: str = ""

    @property
    def passed(self) -> bool:
        in_time = self.budget is None or self.runtime <= self.budget
        return in_time and all(c.ok for c in self.checks.values())

    def add(self, name: str, value, target: str, ok: bool):
        self.checks[name] = Check(float(value), target, bool(ok))

    def line(self) -> str:
        failed = [k for k, c in self.checks.items() if not c.ok]
        if self.budget is not None and self.runtime > self.budget:
            failed.append(f"runtime {self.runtime:.1f}s > {self.budget:g}s")
        status = "PASS" if self.passed else "FAIL"
        tail = "" if not failed else "  failed: " + ", ".join(failed)
        return f"[{status}] criterion {self.number}: {self.title} ({self.runtime:.2f}s){tail}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


@dataclass
class AcceptanceContext:
    """Shared state: tolerance, drift log and results reused across criteria."""

    tol: float = ACCEPT_TOL
    drifts: list = field(default_factory=list)
    cache: dict = field(default_factory=dict)

    def log(self, label: str, traj, hamiltonian, tol: float | None = None):
        self.drifts.append((label, traj.drift(hamiltonian), self.tol if tol is None else tol))
        return traj


def _timed(fn):
    def wrapper(ctx: AcceptanceContext | None = None) -> CriterionResult:
        ctx = ctx if ctx is not None else AcceptanceContext()
        t0 = time.perf_counter()
        res = fn(ctx)
        res.runtime = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def criterion_1(ctx):
    """Jacobi identities on random samples and K(0)."""
    res = CriterionResult(1, "elliptic identities", budget=1.0)
    rng = np.random.default_rng(20240611)
    k = rng.uniform(0.0, 0.99, 10_000)
    u = rng.uniform(-20.0, 20.0, 10_000)
    sn, cn, dn = jacobi(u, k)
    e1 = np.max(np.abs(sn ** 2 + cn ** 2 - 1.0))
    e2 = np.max(np.abs(dn ** 2 + k ** 2 * sn ** 2 - 1.0))
    res.add("sn2+cn2", e1, "<= 1e-12", e1 <= 1e-12)
    res.add("dn2+k2sn2", e2, "<= 1e-12", e2 <= 1e-12)
    dk = abs(complete_K(0.0) - math.pi / 2)
    res.add("K(0)-pi/2", dk, "<= 1e-14", dk <= 1e-14)
    return res


@_timed
def criterion_2(ctx):
    """Closed-form nilpotent geodesics against the integrator."""
    res = CriterionResult(2, "nilpotent closed form vs integration", budget=5.0)
    m = md.nilpotent()
    for lam in LAMBDAS:
        worst = 0.0
        for p_y0 in (1.0, -1.0):
            t_end = 4.0 * K_HALF / math.sqrt(lam)
            traj = ctx.log(f"nilpotent lam={lam} py={p_y0:+g}", shoot(m, p_y0, lam, t_end, ctx.tol),
                           ars_energy(m))
            ts = np.union1d(traj.times, np.linspace(0.0, t_end, 201))
            num = traj(ts)
            y, z, p_y, _ = cf.nilpotent_state(cf.NilpotentGeodesicParams(p_y0, lam), ts)
            err = np.max(np.abs(np.column_stack([y, z, p_y]) - num[:, :3]))
            worst = max(worst, err)
        res.add(f"sup error lam={lam:g}", worst, "<= 1e-8", worst <= 1e-8)
    return res


@_timed
def criterion_3(ctx):
    """Nilpotent cut time: first return to y = 0 and the symmetric meeting."""
    res = CriterionResult(3, "nilpotent cut time")
    m = md.nilpotent()
    for lam in LAMBDAS:
        t_cut = cf.nilpotent_cut_time(lam)
        plus = ctx.log(f"cut lam={lam} py=+1", shoot(m, 1.0, lam, 1.5 * t_cut, ctx.tol), ars_energy(m))
        minus = ctx.log(f"cut lam={lam} py=-1", shoot(m, -1.0, lam, 1.5 * t_cut, ctx.tol), ars_energy(m))
        roots = sign_change_roots(lambda t: plus(t)[0], 1.5 * t_cut)
        rel = abs(roots[0] - t_cut) / t_cut if roots else math.inf
        res.add(f"return time rel error lam={lam:g}", rel, "<= 1e-8", rel <= 1e-8)
        gap = float(np.max(np.abs(plus(t_cut)[:2] - minus(t_cut)[:2])))
        res.add(f"pair gap lam={lam:g}", gap, "<= 1e-9", gap <= 1e-9)
    return res


@_timed
def criterion_4(ctx):
    """First zero of j, its transversality, and the conjugate time scaling."""
    res = CriterionResult(4, "conjugate structure")
    s0, jp = j_first_zero()
    ctx.cache["s0"] = s0
    res.add("s0 in (2K, 4K)", s0, "(2K, 4K)", 2 * K_HALF < s0 < 4 * K_HALF)
    ratio = s0 / K_HALF
    res.add("s0/K", ratio, "[2.9, 3.1]", 2.9 <= ratio <= 3.1)
    res.add("|j'(s0)|", abs(jp), "> 1e-3", abs(jp) > 1e-3)
    m = md.nilpotent()
    t1 = first_conjugate_time(m, 1.0, 1.0, 4.0 * K_HALF, CUT_TOL)
    t4 = first_conjugate_time(m, 1.0, 4.0, 2.0 * K_HALF, CUT_TOL)
    d1 = abs(t1 - s0) if t1 is not None else math.inf
    res.add("|t*(1) - s0|", d1, "<= 1e-6", d1 <= 1e-6)
    d4 = abs(t4 - 0.5 * t1) if t1 is not None and t4 is not None else math.inf
    res.add("|t*(4) - t*(1)/2|", d4, "<= 1e-8", d4 <= 1e-8)
    return res


@_timed
def criterion_5(ctx):
    """g1, g2, g3 at 2K and the p_y sign flip."""
    res = CriterionResult(5, "perturbation constants")
    g1, g2, g3 = g_constants()
    res.add("g1(2K)", g1, "within 5% of -2pi", abs(g1 + 2 * math.pi) <= 0.05 * 2 * math.pi)
    res.add("g2(2K)", g2, "within 5% of -pi", abs(g2 + math.pi) <= 0.05 * math.pi)
    res.add("|g3(2K)|/|g1(2K)|", abs(g3) / abs(g1), "<= 0.05", abs(g3) <= 0.05 * abs(g1))
    m = md.order0(1.0, 0.0)
    up = expansion_at(m, 2 * K_HALF, 1, 1)
    down = expansion_at(m, 2 * K_HALF, -1, 1)
    odd = max(abs(up.g2 + down.g2), abs(up.Y0 + down.Y0), abs(up.PY0 + down.PY0))
    even = max(abs(up.g1 - down.g1), abs(up.g3 - down.g3), abs(up.Z0 - down.Z0))
    res.add("flip: odd parts negate", odd, "<= 1e-10", odd <= 1e-10)
    res.add("flip: even parts agree", even, "<= 1e-10", even <= 1e-10)
    return res


def _cut_branches(ctx):
    if "cut" not in ctx.cache:
        m = md.order0(1.0, 1.0)
        ctx.cache["cut"] = {b: cut_locus(m, CUT_ETAS, b) for b in ("upper", "lower")}
    return ctx.cache["cut"]


@_timed
def criterion_6(ctx):
    """Newton-matched cut points for eps = eps' = 1: exponent, scale and branch ratio."""
    res = CriterionResult(6, "cut-locus cusp", budget=120.0)
    g1, g2, _ = g_constants()
    branches = _cut_branches(ctx)
    alpha = {}
    for branch, points in branches.items():
        yz = np.array([[p.y, p.z] for p in points])
        a, _ = fit_cusp(yz)
        res.add(f"{branch} exponent", a, "1.5 +- 0.1", abs(a - 1.5) <= 0.1)
        _, alpha[branch] = fit_cusp(yz, exponent=1.5)
        smallest = min(points, key=lambda p: p.eta_plus)
        ratio = smallest.y / smallest.eta_plus ** 2
        target = g1 - g2 if branch == "upper" else g1 + g2
        res.add(f"{branch} y_cut/eta0^2", ratio, f"within 25% of {target:.4f}",
                abs(ratio - target) <= 0.25 * abs(target))
        res.add(f"{branch} f1 sign", points[-1].f_sign, "reported", True)
    r = alpha["upper"] / alpha["lower"]
    res.add("alpha1/alpha2", r, "within 30% of 27", abs(r - 27.0) <= 0.3 * 27.0)
    return res


@_timed
def criterion_7(ctx):
    """eps' = 0: cut points on the z-axis and a y-symmetric sphere."""
    res = CriterionResult(7, "symmetric degeneration")
    m = md.order0(1.0, 0.0)
    worst = 0.0
    for branch in ("upper", "lower"):
        for p in cut_locus(m, SYMMETRIC_ETAS, branch):
            worst = max(worst, abs(p.y) / p.eta_plus ** 2)
    res.add("max |y_cut|/eta0^2", worst, "<= 0.05", worst <= 0.05)
    sph = sphere(m, 0.3, resolution=60)
    pts = sph.points
    refl = pts * np.array([-1.0, 1.0])
    dist = np.sqrt(((refl[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)).min(axis=1)
    res.add("sphere matched", float(sph.matched), "1", sph.matched)
    res.add("sphere reflection mismatch", dist.max(), "<= 1e-6", dist.max() <= 1e-6)
    return res


@_timed
def criterion_8(ctx):
    """Lifted flow projection, the Grushin cut time and the Heisenberg conjugate root."""
    res = CriterionResult(8, "lift and projection")
    m = md.order0(1.0, 0.5)
    worst = 0.0
    for p_y0, p_z0 in ((1.0, 1.0), (-1.0, 4.0), (1.0, -9.0)):
        t_end = 2.5 * K_HALF / math.sqrt(abs(p_z0))
        ars = ctx.log(f"order0 py={p_y0:+g} pz={p_z0:g}", shoot(m, p_y0, p_z0, t_end, ctx.tol),
                      ars_energy(m))
        lifted = ctx.log(f"lifted py={p_y0:+g} pz={p_z0:g}",
                         integrate(lambda s: md.lifted_rhs_order0(m, s),
                                   np.array([0.0, 0.0, 0.0, 0.0, p_y0, p_z0]), t_end, ctx.tol,
                                   atol=0.01 * ctx.tol),
                         lambda s: md.lifted_hamiltonian(m, s))
        ts = np.linspace(0.0, t_end, 101)
        err = np.max(np.abs(ars(ts)[:, :2] - lifted(ts)[:, 1:3]))
        worst = max(worst, err)
    res.add("projection sup error", worst, "<= 1e-10", worst <= 1e-10)

    for p_y in (1.0, 2.0):
        t_cut = cf.grushin_cut_time(p_y)
        plus = ctx.log(f"grushin px=+1 py={p_y:g}",
                       integrate(md.grushin_rhs, np.array([0.0, 0.0, 1.0, p_y]), 1.5 * t_cut, ctx.tol),
                       md.grushin_hamiltonian)
        roots = sign_change_roots(lambda t: plus(t)[0], 1.5 * t_cut)
        err = abs(roots[0] - t_cut) if roots else math.inf
        res.add(f"grushin cut py={p_y:g}", err, "<= 1e-8", err <= 1e-8)
        t_conj = conjugate_times(md.grushin_rhs, md.grushin_jacobian, [0.0, 0.0, 1.0, p_y],
                                 [[0.0], [0.0], [0.0], [1.0]], 2, 1.5 * cf.grushin_conjugate_time(p_y),
                                 ctx.tol)
        err = abs(t_conj[0] * p_y - cf.tan_fixed_point(1)) if t_conj else math.inf
        res.add(f"grushin conjugate root py={p_y:g}", t_conj[0] * p_y if t_conj else math.nan,
                "4.493409 to 1e-8", err <= 1e-8)

        state0 = [0.0, 0.0, 0.0, 1.0, p_y, 0.0]
        var0 = np.zeros((6, 2))
        var0[4, 0] = var0[5, 1] = 1.0
        t_max = 1.2 * cf.heisenberg_tan_conjugate_time(p_y)
        ctx.log(f"heisenberg py={p_y:g}",
                integrate(md.heisenberg_rhs, np.array(state0), t_max, ctx.tol), md.heisenberg_hamiltonian)
        roots = conjugate_times(md.heisenberg_rhs, md.heisenberg_jacobian, state0, var0, 3, t_max,
                                ctx.tol, max_roots=2)
        target = cf.heisenberg_tan_conjugate_time(p_y)
        tan_root = min(roots, key=lambda r: abs(r - target)) if roots else math.nan
        err = abs(tan_root - target)
        res.add(f"heisenberg tan root py={p_y:g}", tan_root * p_y, "8.986818 to 1e-8", err <= 1e-8)
        if roots:
            res.add(f"heisenberg earliest root py={p_y:g}", roots[0] * p_y, "reported (2 pi)", True)
    return res


@_timed
def criterion_9(ctx):
    """Energy drift of every logged trajectory, including the matched cut geodesics."""
    res = CriterionResult(9, "energy conservation")
    for branch, points in ctx.cache.get("cut", {}).items():
        m = md.order0(1.0, 1.0)
        sigma = 1.0 if branch == "upper" else -1.0
        for p in points:
            for p_y0, eta in ((1.0, p.eta_plus), (-1.0, p.eta_minus)):
                ctx.log(f"cut {branch} eta0={p.eta_plus:g} py={p_y0:+g}",
                        shoot(m, p_y0, sigma / eta ** 2, p.t, CUT_TOL), ars_energy(m), CUT_TOL)
    if not ctx.drifts:
        res.add("trajectories logged", 0, ">= 1", False)
        return res
    ratios = [d / t for _, d, t in ctx.drifts]
    i = int(np.argmax(ratios))
    res.add("trajectories logged", len(ctx.drifts), ">= 1", True)
    res.add("max drift / tol", ratios[i], "<= 100", ratios[i] <= 100.0)
    res.notes = f"worst: {ctx.drifts[i][0]}"
    return res


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9)


@dataclass
class AcceptanceReport:
    results: list
    constants: dict
    runtime: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self):
        return [r.line() for r in self.results]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "runtime": self.runtime,
            "constants": self.constants,
            "criteria": [r.to_dict() for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def run_acceptance(tol: float = ACCEPT_TOL, echo=None) -> AcceptanceReport:
    """Run all criteria in order; ``echo`` receives each result line as it finishes."""
    if not 0.0 < tol <= 1e-4:
        raise ValueError("tol must lie in (0, 1e-4]")
    ctx = AcceptanceContext(tol=tol)
    t0 = time.perf_counter()
    results = []
    for crit in CRITERIA:
        r = crit(ctx)
        results.append(r)
        if echo is not None:
            echo(r.line())
    consts = constants_report()
    consts["s0_over_K"] = consts["s0"] / consts["K"]
    consts["grushin_conjugate_root"] = cf.tan_fixed_point(1)
    consts["heisenberg_conjugate_root"] = 2.0 * cf.tan_fixed_point(1)
    return AcceptanceReport(results, consts, time.perf_counter() - t0)
