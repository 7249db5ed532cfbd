"""Adaptive integration, exponential map and first conjugate times.

The integrator is the Dormand-Prince 5(4) pair with a PI step-size controller
and the usual free 4th-order continuous extension.  Vector fields are
autonomous callables ``rhs(state) -> ndarray``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .models import ArsModel, ars_hamiltonian, ars_jacobian, ars_rhs

DEFAULT_TOL = float(os.environ.get("ARS_TOL", "1e-10"))

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# Shampine's dense-output polynomial coefficients (powers theta^1..theta^4).
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA


class IntegrationError(RuntimeError):
    """Step size underflow or non-finite state; ``last_time`` is the last good time."""

    def __init__(self, message: str, last_time: float):
        super().__init__(f"{message} (last good t = {last_time!r})")
        self.last_time = last_time


@dataclass
class Trajectory:
    """Accepted steps of one integration plus a dense interpolant."""

    times: np.ndarray
    states: np.ndarray
    model_name: str = ""
    _q: list = field(default_factory=list, repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.times)

    def __call__(self, t):
        """Dense-output state at time(s) ``t`` inside the integration interval."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if len(self.times) == 1:
            out = np.repeat(self.states[:1], len(t_arr), axis=0)
            return out[0] if np.ndim(t) == 0 else out
        if np.any(t_arr < self.times[0] - 1e-14 * max(1.0, abs(self.times[0]))) or np.any(
            t_arr > self.times[-1] + 1e-14 * max(1.0, abs(self.times[-1]))
        ):
            raise ValueError("requested time outside the integrated interval")
        idx = np.clip(np.searchsorted(self.times, t_arr, side="right") - 1, 0, len(self.times) - 2)
        out = np.empty((len(t_arr), self.states.shape[1]))
        for n, (i, tt) in enumerate(zip(idx, t_arr)):
            h = self.times[i + 1] - self.times[i]
            theta = (tt - self.times[i]) / h
            powers = np.array([theta, theta ** 2, theta ** 3, theta ** 4])
            out[n] = self.states[i] + h * (self._q[i] @ powers)
        return out[0] if np.ndim(t) == 0 else out

    def drift(self, hamiltonian) -> float:
        """Maximum |H(state) - H(state0)| over the accepted steps."""
        h0 = hamiltonian(self.states[0])
        return float(max(abs(hamiltonian(s) - h0) for s in self.states))


def _initial_step(rhs, y0, f0, sc, order=5):
    d0 = np.sqrt(np.mean((y0 / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = rhs(y0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / order)
    return min(100 * h0, h1)


def integrate(rhs, state0, t_end: float, tol: float = DEFAULT_TOL, *, atol=None,
              model_name: str = "", max_steps: int = 1_000_000, h_init: float | None = None) -> Trajectory:
    """Integrate ``d/dt state = rhs(state)`` from t = 0 to ``t_end`` (>= 0).

    ``tol`` is the relative tolerance of the local error test; ``atol``
    (scalar or per-component, default ``tol``) the absolute one.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if t_end < 0.0:
        raise ValueError("only forward integration is supported")
    y = np.array(state0, dtype=float)
    n = y.size
    atol_v = np.full(n, tol) if atol is None else np.broadcast_to(np.asarray(atol, dtype=float), (n,)).copy()
    times = [0.0]
    states = [y.copy()]
    qs = []
    if t_end == 0.0:
        return Trajectory(np.array(times), np.array(states), model_name, qs)

    k = np.empty((7, n))
    k[0] = rhs(y)
    if not np.all(np.isfinite(k[0])):
        raise IntegrationError("non-finite vector field at the initial state", 0.0)
    h = h_init if h_init is not None else _initial_step(rhs, y, k[0], atol_v + tol * np.abs(y))
    h = min(h, t_end)
    t = 0.0
    err_old = 1e-4
    reject = False
    for _ in range(max_steps):
        if t >= t_end:
            break
        last = t + h >= t_end * (1.0 - 1e-15)
        if last:
            h = t_end - t
        if h <= 16.0 * np.finfo(float).eps * max(abs(t), 1.0):
            raise IntegrationError("step size underflow", t)
        for s in range(1, 7):
            k[s] = rhs(y + h * (_A[s] @ k[:s]))
        y_new = y + h * (_B @ k)
        err_vec = h * (_E @ k)
        sc = atol_v + tol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / sc) ** 2)))
        if not np.isfinite(err):
            h *= 0.1
            reject = True
            continue
        fac11 = err ** _EXPO if err > 0.0 else 0.0
        if err <= 1.0:
            fac = fac11 / err_old ** _BETA
            fac = min(5.0, max(0.1, fac / _SAFETY))
            h_next = h / fac
            if reject:
                h_next = min(h_next, h)
            err_old = max(err, 1e-4)
            qs.append(k.T @ _P)
            t = t_end if last else t + h
            y = y_new
            times.append(t)
            states.append(y.copy())
            k[0] = k[6]
            reject = False
            h = h_next
        else:
            h = h / min(5.0, fac11 / _SAFETY)
            reject = True
    else:
        raise IntegrationError("maximum number of steps exceeded", t)
    return Trajectory(np.array(times), np.array(states), model_name, qs)


def with_variations(rhs, jac, n: int):
    """Augment ``rhs`` with the linearized flow of an ``n x k`` variation matrix.

    The augmented state is ``[x, V.ravel()]`` with V stored row-major.
    """
    def augmented(u):
        x = u[:n]
        v = u[n:].reshape(n, -1)
        return np.concatenate([rhs(x), (jac(x) @ v).ravel()])
    return augmented


def _shoot_scale(p_z0: float, t: float) -> float:
    """Weighted length scale of the reachable set: min(eta, t)."""
    eta = 1.0 / math.sqrt(abs(p_z0)) if p_z0 != 0.0 else math.inf
    scale = min(eta, t) if t > 0.0 else eta
    return 1.0 if not math.isfinite(scale) or scale <= 0.0 else scale


def ars_atol(p_z0: float, t: float, tol: float) -> np.ndarray:
    """Per-component absolute tolerance matched to the weights of (y, z, p_y, p_z)."""
    s = _shoot_scale(p_z0, t)
    return tol * np.array([s, s ** 3, 1.0, s ** -2])


def _check_tangency_covector(p_y0: float):
    if abs(abs(p_y0) - 1.0) > 1e-12:
        raise ValueError("at the tangency point H = 1/2 forces p_y(0) = +1 or -1")


def shoot(m: ArsModel, p_y0: float, p_z0: float, t: float, tol: float = DEFAULT_TOL) -> Trajectory:
    """Geodesic of ``m`` from the origin with initial covector (p_y0, p_z0)."""
    _check_tangency_covector(p_y0)
    state0 = np.array([0.0, 0.0, float(p_y0), float(p_z0)])
    return integrate(lambda s: ars_rhs(m, s), state0, t, tol,
                     atol=ars_atol(p_z0, t, tol), model_name=m.name)


def exp_map(m: ArsModel, p_y0: float, p_z0: float, t: float, tol: float = DEFAULT_TOL):
    """Endpoint (y, z) of the arc-length geodesic from (0, 0) at time ``t``."""
    if t == 0.0:
        _check_tangency_covector(p_y0)
        return 0.0, 0.0
    y, z = shoot(m, p_y0, p_z0, t, tol).final[:2]
    return float(y), float(z)


@dataclass
class VariationalState:
    """Base state and the 4x2 derivative d(y, z, p_y, p_z)/d(p_y(0), p_z(0))."""

    base: np.ndarray
    jac: np.ndarray

    @classmethod
    def initial(cls, state0) -> "VariationalState":
        jac = np.zeros((4, 2))
        jac[2, 0] = jac[3, 1] = 1.0
        return cls(np.asarray(state0, dtype=float), jac)

    def pack(self) -> np.ndarray:
        return np.concatenate([self.base, self.jac.ravel()])

    @classmethod
    def unpack(cls, u) -> "VariationalState":
        return cls(np.asarray(u[:4]), np.asarray(u[4:]).reshape(4, 2))


def shoot_variational(m: ArsModel, p_y0: float, p_z0: float, t: float, tol: float = DEFAULT_TOL) -> Trajectory:
    """Geodesic together with its variational (Jacobi field) matrix."""
    _check_tangency_covector(p_y0)
    v0 = VariationalState.initial([0.0, 0.0, p_y0, p_z0])
    base_atol = ars_atol(p_z0, t, tol)
    s = _shoot_scale(p_z0, t)
    jac_atol = np.outer(base_atol, [1.0, s ** 2]).ravel()
    rhs = with_variations(lambda x: ars_rhs(m, x), lambda x: ars_jacobian(m, x), 4)
    return integrate(rhs, v0.pack(), t, tol, atol=np.concatenate([base_atol, jac_atol]),
                     model_name=m.name)


def _ars_det(m: ArsModel, u) -> float:
    v = VariationalState.unpack(u)
    dy, dz = ars_rhs(m, v.base)[:2]
    return float(dy * v.jac[1, 1] - dz * v.jac[0, 1])


def exp_jacobian_det(m: ArsModel, p_y0: float, p_z0: float, t: float, tol: float = DEFAULT_TOL) -> float:
    """det [d(y,z)/dt, d(y,z)/dp_z0] of the exponential map at (p_z0, t)."""
    if t == 0.0:
        return 0.0
    return _ars_det(m, shoot_variational(m, p_y0, p_z0, t, tol).final)


def sign_change_roots(fun, t_max: float, grid: int = 400, max_roots: int = 1, xtol: float = 1e-14):
    """First ``max_roots`` sign changes of ``fun`` on (0, t_max], refined by brentq."""
    ts = np.linspace(0.0, t_max, grid + 1)[1:]
    vals = np.array([fun(t) for t in ts])
    roots = []
    for i in range(1, len(ts)):
        a, b = vals[i - 1], vals[i]
        if a == 0.0:
            continue
        if b == 0.0 or np.sign(a) != np.sign(b):
            root = ts[i] if b == 0.0 else brentq(fun, ts[i - 1], ts[i], xtol=xtol, rtol=1e-15, maxiter=200)
            roots.append(float(root))
            if len(roots) >= max_roots:
                break
    return roots


def conjugate_times(rhs, jac, state0, variations0, n_pos: int, t_max: float,
                    tol: float = DEFAULT_TOL, atol=None, grid: int = 400, max_roots: int = 1):
    """Zeros of det[d q/dt, d q/d(params)] along one extremal.

    ``variations0`` is the ``n x (n_pos - 1)`` matrix of initial covector
    variations; q is the first ``n_pos`` components of the state.
    """
    n = len(state0)
    v0 = np.asarray(variations0, dtype=float).reshape(n, n_pos - 1)
    u0 = np.concatenate([np.asarray(state0, dtype=float), v0.ravel()])
    if atol is not None:
        atol = np.concatenate([np.broadcast_to(atol, (n,)), np.full(v0.size, tol)])
    traj = integrate(with_variations(rhs, jac, n), u0, t_max, tol, atol=atol)

    def det(t):
        u = traj(t)
        x = u[:n]
        v = u[n:].reshape(n, -1)
        mat = np.column_stack([rhs(x)[:n_pos], v[:n_pos]])
        return float(np.linalg.det(mat))

    return sign_change_roots(det, t_max, grid, max_roots)


def first_conjugate_time(m: ArsModel, p_y0: float, p_z0: float, t_max: float,
                         tol: float = DEFAULT_TOL, grid: int = 400):
    """First zero of ``exp_jacobian_det`` in (0, t_max]; None if there is none."""
    traj = shoot_variational(m, p_y0, p_z0, t_max, tol)
    roots = sign_change_roots(lambda t: _ars_det(m, traj(t)), t_max, grid, 1)
    return roots[0] if roots else None


def ars_energy(m: ArsModel):
    return lambda s: ars_hamiltonian(m, s[:4])
