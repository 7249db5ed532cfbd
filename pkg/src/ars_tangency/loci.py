"""Wave fronts, spheres, conjugate and cut loci by shooting from the origin.

Cut points are found by matching the two geodesic families p_y(0) = +1 and
p_y(0) = -1 with a damped Newton iteration.  Geodesics are indexed by
eta = 1/sqrt|p_z(0)|; the upper branch has p_z(0) > 0, the lower p_z(0) < 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .elliptic import K_HALF
from .flow import _ars_det, exp_map, shoot_variational, sign_change_roots
from .models import ArsModel, f1_coefficient
from .perturb import matching_shifts

CUT_TOL = 1e-12
_BRANCH_SIGN = {"upper": 1.0, "lower": -1.0}


class ConvergenceError(RuntimeError):
    """Newton matching did not converge; ``last_iterate`` holds the final guess."""

    def __init__(self, message, last_iterate):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass
class FrontPoint:
    y: float
    z: float
    p_y0: float
    p_z0: float
    t: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class CutPoint:
    y: float
    z: float
    t: float
    eta_plus: float
    eta_minus: float
    branch: str
    residual: float = 0.0
    iterations: int = 0
    f_sign: float = 0.0  # sign of f at the cut point: side of the singular set


@dataclass
class ConjugatePoint:
    y: float
    z: float
    t: float
    p_z0: float
    p_y0: float = 1.0
    fold_slope: float = math.nan  # normalized d(det)/dt at the root


@dataclass
class Sphere:
    points: np.ndarray
    radius: float
    corners: list = field(default_factory=list)
    matched: bool = True


def _branch_sign(branch: str) -> float:
    try:
        return _BRANCH_SIGN[branch]
    except KeyError:
        raise ValueError(f"branch must be 'upper' or 'lower', got {branch!r}") from None


def compute_front(m: ArsModel, t: float, p_z0_grid, signs=(1, -1), tol: float = CUT_TOL):
    """Endpoints at time ``t`` for every (sign, p_z0); failures are kept per point."""
    if not t > 0.0:
        raise ValueError("front radius must be positive")
    out = []
    for sign in signs:
        for p_z0 in p_z0_grid:
            try:
                y, z = exp_map(m, sign, float(p_z0), t, tol)
                out.append(FrontPoint(y, z, float(sign), float(p_z0), t))
            except Exception as exc:  # noqa: BLE001 - recorded, not fatal
                out.append(FrontPoint(math.nan, math.nan, float(sign), float(p_z0), t, str(exc)))
    return out


def log_pz_grid(p_min: float, p_max: float, n: int, both_signs: bool = True) -> np.ndarray:
    """Log-spaced |p_z0| grid with 0 included; mirrored to negative values."""
    pos = np.geomspace(p_min, p_max, n)
    grid = np.concatenate([[0.0], pos])
    if both_signs:
        grid = np.concatenate([-pos[::-1], grid])
    return grid


def _damped_newton(fun, x0, res_tol: float, max_iter: int = 50, fd_step: float = 1e-6):
    """Damped Newton with central-difference Jacobian.

    Converges when |F| <= res_tol, or when the step stagnates at the noise
    floor with |F| <= 1e-8.
    """
    x = np.asarray(x0, dtype=float)
    fx = fun(x)
    norm = float(np.max(np.abs(fx)))
    for it in range(1, max_iter + 1):
        if norm <= res_tol:
            return x, norm, it - 1
        jac = np.empty((len(fx), len(x)))
        for i in range(len(x)):
            h = fd_step * max(1.0, abs(x[i]))
            e = np.zeros_like(x)
            e[i] = h
            jac[:, i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Newton matrix", x) from None
        lam = 1.0
        while True:
            x_try = x + lam * step
            try:
                f_try = fun(x_try)
                n_try = float(np.max(np.abs(f_try)))
            except Exception:  # noqa: BLE001 - integration blow-up counts as a bad step
                n_try = math.inf
            if n_try < norm or lam < 1e-6:
                break
            lam *= 0.5
        if n_try >= norm:
            # No descent even for tiny steps: integration noise floor.
            if norm <= 1e-8:
                return x, norm, it
            raise ConvergenceError(f"Newton stalled at |F| = {norm:.3e}", x)
        small = np.max(np.abs(lam * step)) <= 1e-13 * max(1.0, float(np.max(np.abs(x))))
        x, fx, norm = x_try, f_try, n_try
        if small and norm <= 1e-8:
            return x, norm, it
    if norm <= 1e-8:
        return x, norm, max_iter
    raise ConvergenceError(f"no convergence after {max_iter} iterations (|F| = {norm:.3e})", x)


def _cut_seed(m: ArsModel, eta0: float):
    """(eta_minus/eta0, t/eta0) predicted by the leading-order matching."""
    try:
        c, c_prime = matching_shifts(m)
    except Exception:  # noqa: BLE001 - fall back to the nilpotent seed
        c = c_prime = 0.0
    return np.array([1.0 + (c_prime - c) * eta0, 2.0 * K_HALF * (1.0 - c * eta0)])


def cut_point_pair(m: ArsModel, eta0: float, branch: str = "upper", tol: float = CUT_TOL,
                   seed=None, res_tol: float = 1e-11) -> CutPoint:
    """Cut point where (p_y=1, eta_plus=eta0) meets a p_y=-1 geodesic at equal time.

    Unknowns are eta_minus and t, solved in the scaled form
    (eta_minus/eta0, t/eta0) against the residual (dy/eta0, dz/eta0^3).
    """
    if not eta0 > 0.0:
        raise ValueError("eta0 must be positive")
    sigma = _branch_sign(branch)
    p_plus = sigma / eta0 ** 2

    def residual(v):
        ratio, tau = v
        if ratio <= 0.0 or tau <= 0.0:
            raise ValueError("left the admissible region")
        t = tau * eta0
        yp, zp = exp_map(m, 1.0, p_plus, t, tol)
        ym, zm = exp_map(m, -1.0, sigma / (ratio * eta0) ** 2, t, tol)
        return np.array([(yp - ym) / eta0, (zp - zm) / eta0 ** 3])

    x0 = _cut_seed(m, eta0) if seed is None else np.asarray(seed, dtype=float)
    try:
        (ratio, tau), norm, its = _damped_newton(residual, x0, res_tol)
    except (ConvergenceError, ValueError) as exc:
        raise ConvergenceError(f"cut matching failed at eta0={eta0} ({exc}); try a smaller eta0",
                               getattr(exc, "last_iterate", x0)) from None
    t = tau * eta0
    yp, zp = exp_map(m, 1.0, p_plus, t, tol)
    ym, zm = exp_map(m, -1.0, sigma / (ratio * eta0) ** 2, t, tol)
    y, z = 0.5 * (yp + ym), 0.5 * (zp + zm)
    gap = max(abs(yp - ym), abs(zp - zm))
    if np.sign(z) != sigma and z != 0.0:
        warnings.warn(f"{branch} cut point at eta0={eta0} has z={z:.3e} on the wrong side", stacklevel=2)
    return CutPoint(y, z, t, eta0, ratio * eta0, branch, gap, its,
                    float(np.sign(f1_coefficient(m, y, z))))


def cut_locus(m: ArsModel, eta0_list, branch: str = "upper", tol: float = CUT_TOL):
    """Cut points for each eta0, seeding each solve from the previous one."""
    points = []
    prev = None
    for eta0 in eta0_list:
        seed = None
        if prev is not None:
            # (ratio - 1) and (tau - 2K) are O(eta0): rescale the previous offsets.
            scale = eta0 / prev.eta_plus
            seed = np.array([1.0 + (prev.eta_minus / prev.eta_plus - 1.0) * scale,
                             2.0 * K_HALF + (prev.t / prev.eta_plus - 2.0 * K_HALF) * scale])
        try:
            point = cut_point_pair(m, eta0, branch, tol, seed=seed)
        except ConvergenceError:
            if seed is None:
                raise
            point = cut_point_pair(m, eta0, branch, tol)
        points.append(point)
        prev = point
    return points


def conjugate_point(m: ArsModel, p_y0: float, p_z0: float, t_max: float, tol: float = CUT_TOL,
                    grid: int = 400):
    """First conjugate point along one geodesic, or None."""
    traj = shoot_variational(m, p_y0, p_z0, t_max, tol)
    det = lambda t: _ars_det(m, traj(t))
    roots = sign_change_roots(det, t_max, grid, 1)
    if not roots:
        return None
    t_c = roots[0]
    h = 1e-4 * t_c
    scale = max(abs(det(t)) for t in np.linspace(0.25 * t_c, t_c, 16))
    slope = (det(t_c + h) - det(t_c - h)) / (2.0 * h) * t_c / scale
    y, z = traj(t_c)[:2]
    return ConjugatePoint(float(y), float(z), t_c, p_z0, p_y0, float(slope))


def conjugate_locus(m: ArsModel, eta_list, tol: float = CUT_TOL, t_factor: float = 4.0,
                    signs=(1, -1), branches=("upper", "lower")):
    """Conjugate points for p_z0 = +-1/eta^2 and both p_y0 signs.

    Returns a dict keyed by (p_y0, branch); missing sign changes appear as None.
    """
    out = {}
    for p_y0 in signs:
        for branch in branches:
            sigma = _branch_sign(branch)
            out[(p_y0, branch)] = [
                conjugate_point(m, p_y0, sigma / eta ** 2, t_factor * K_HALF * eta, tol) for eta in eta_list
            ]
    return out


def _front_arc(m, p_y0, sigma, r, s_max, n, tol):
    s = np.linspace(0.0, s_max, n)
    pts = np.empty((n, 2))
    for i, si in enumerate(s):
        pts[i] = exp_map(m, p_y0, sigma * (si / r) ** 2, r, tol)
    return pts


def sphere_corner(m: ArsModel, r: float, branch: str, tol: float = CUT_TOL, res_tol: float = 1e-11):
    """Matched pair on the front of radius r: unknowns (eta_plus, eta_minus)."""
    sigma = _branch_sign(branch)
    eta_ref = r / (2.0 * K_HALF)

    def residual(v):
        a, b = v
        if a <= 0.0 or b <= 0.0:
            raise ValueError("left the admissible region")
        yp, zp = exp_map(m, 1.0, sigma / (a * eta_ref) ** 2, r, tol)
        ym, zm = exp_map(m, -1.0, sigma / (b * eta_ref) ** 2, r, tol)
        return np.array([(yp - ym) / eta_ref, (zp - zm) / eta_ref ** 3])

    try:
        c, c_prime = matching_shifts(m)
    except Exception:  # noqa: BLE001
        c = c_prime = 0.0
    (a, b), norm, its = _damped_newton(residual, [1.0 + c * eta_ref, 1.0 + c_prime * eta_ref], res_tol)
    eta_p, eta_m = a * eta_ref, b * eta_ref
    yp, zp = exp_map(m, 1.0, sigma / eta_p ** 2, r, tol)
    ym, zm = exp_map(m, -1.0, sigma / eta_m ** 2, r, tol)
    y, z = 0.5 * (yp + ym), 0.5 * (zp + zm)
    return CutPoint(y, z, r, eta_p, eta_m, branch, max(abs(yp - ym), abs(zp - zm)), its,
                    float(np.sign(f1_coefficient(m, y, z))))


def sphere(m: ArsModel, r: float, resolution: int = 100, tol: float = CUT_TOL) -> Sphere:
    """Closed sphere curve of radius r, pruned at the two matched cut pairs.

    The curve runs: upper corner -> (r, 0) -> lower corner -> (-r, 0) -> back,
    with ``resolution`` points per quarter arc.  Corners are not C^1.
    """
    if not r > 0.0:
        raise ValueError("radius must be positive")
    try:
        up = sphere_corner(m, r, "upper", tol)
        low = sphere_corner(m, r, "lower", tol)
    except (ConvergenceError, ValueError) as exc:
        warnings.warn(f"unmatched cut pairs at r={r}: {exc}; returning the raw front", stacklevel=2)
        s_max = 2.0 * K_HALF
        arcs = [_front_arc(m, 1.0, 1.0, r, s_max, resolution, tol)[::-1],
                _front_arc(m, 1.0, -1.0, r, s_max, resolution, tol)[1:],
                _front_arc(m, -1.0, -1.0, r, s_max, resolution, tol)[::-1],
                _front_arc(m, -1.0, 1.0, r, s_max, resolution, tol)[1:]]
        return Sphere(np.vstack(arcs), r, [], matched=False)
    a1 = _front_arc(m, 1.0, 1.0, r, r / up.eta_plus, resolution, tol)[::-1]
    a2 = _front_arc(m, 1.0, -1.0, r, r / low.eta_plus, resolution, tol)[1:]
    a3 = _front_arc(m, -1.0, -1.0, r, r / low.eta_minus, resolution, tol)[::-1][1:]
    a4 = _front_arc(m, -1.0, 1.0, r, r / up.eta_minus, resolution, tol)[1:-1]
    return Sphere(np.vstack([a1, a2, a3, a4]), r, [up, low], matched=True)


def _segments_intersect(p, q, a, b):
    """Proper intersections between segments p->q (N) and a->b (M); returns index pairs and points."""
    d1 = q - p
    d2 = b - a
    denom = d1[:, None, 0] * d2[None, :, 1] - d1[:, None, 1] * d2[None, :, 0]
    diff = a[None, :, :] - p[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (diff[..., 0] * d2[None, :, 1] - diff[..., 1] * d2[None, :, 0]) / denom
        u = (diff[..., 0] * d1[:, None, 1] - diff[..., 1] * d1[:, None, 0]) / denom
    hit = (denom != 0.0) & (s > 0.0) & (s < 1.0) & (u > 0.0) & (u < 1.0)
    ii, jj = np.nonzero(hit)
    pts = p[ii] + s[ii, jj, None] * d1[ii]
    return ii, jj, pts


def polyline_self_intersections(points, closed: bool = True):
    """Crossings between non-adjacent segments of a polyline (segment sweep)."""
    pts = np.asarray(points, dtype=float)
    p = pts if closed else pts[:-1]
    q = np.roll(pts, -1, axis=0) if closed else pts[1:]
    ii, jj, xs = _segments_intersect(p, q, p, q)
    n = len(p)
    keep = (jj > ii + 1) & ~(closed & (ii == 0) & (jj == n - 1))
    return [(int(i), int(j), x) for i, j, x in zip(ii[keep], jj[keep], xs[keep])]


def cut_point_by_sweep(m: ArsModel, t: float, branch: str = "upper", resolution: int = 400,
                       s_max: float = 2.6 * K_HALF, tol: float = CUT_TOL):
    """Validator: intersect the p_y=+1 and p_y=-1 fronts at time t on one branch."""
    sigma = _branch_sign(branch)
    plus = _front_arc(m, 1.0, sigma, t, s_max, resolution, tol)
    minus = _front_arc(m, -1.0, sigma, t, s_max, resolution, tol)
    _, _, xs = _segments_intersect(plus[:-1], plus[1:], minus[:-1], minus[1:])
    return xs


def fit_cusp(points, exponent: float | None = None):
    """Least-squares power law log|z| = a log|y| + b through one branch.

    Returns ``(a, coefficient)``.  Near a = 3/2 the coefficient is alpha in
    z^2 = alpha y^3, i.e. sign(y) e^{2b}; otherwise it is c in z = c |y|^a,
    i.e. sign(z) e^b.  Passing ``exponent`` fixes a and fits b alone.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 4:
        raise ValueError("fit_cusp needs at least 4 points on one branch")
    y, z = np.abs(pts[:, 0]), np.abs(pts[:, 1])
    if np.any(y == 0.0) or np.any(z == 0.0):
        raise ValueError("fit_cusp needs y != 0 and z != 0")
    if y.max() / y.min() < 4.0:
        raise ValueError("degenerate spread: max|y|/min|y| < 4")
    if exponent is None:
        a, b = np.polyfit(np.log(y), np.log(z), 1)
    else:
        a = float(exponent)
        b = float(np.mean(np.log(z) - a * np.log(y)))
    if abs(a - 1.5) < 0.25:
        coefficient = float(np.sign(np.median(pts[:, 0])) * math.exp(2.0 * b))
    else:
        coefficient = float(np.sign(np.median(pts[:, 1])) * math.exp(b))
    return float(a), coefficient
