"""Closed-form geodesics: the nilpotent tangency model and the Grushin plane.

Nilpotent geodesics from the origin with covector (p_y0 = +-1, p_z0 = lam) are

    y(t) = -p_y0 sqrt(2) eta cn(K + s)
    z(t) = sign(lam) eta^3 / 3 * (s + 2 sn cn dn (K + s)),    s = t / eta

with eta = 1/sqrt|lam| and modulus 1/sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .elliptic import KAPPA, K_HALF, jacobi

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class NilpotentGeodesicParams:
    p_y0: float
    lam: float

    def __post_init__(self):
        if abs(abs(self.p_y0) - 1.0) > 1e-12:
            raise ValueError("p_y0 must be +1 or -1")

    @property
    def eta(self) -> float:
        return 1.0 / math.sqrt(abs(self.lam)) if self.lam != 0.0 else math.inf


def nilpotent_state(p: NilpotentGeodesicParams, t):
    """Full cotangent state (y, z, p_y, p_z) along the nilpotent geodesic."""
    t = np.asarray(t, dtype=float)
    if p.lam == 0.0:
        zero = np.zeros_like(t)
        return p.p_y0 * t, zero, p.p_y0 + zero, zero
    eta = p.eta
    s = t / eta
    sn, cn, dn = jacobi(K_HALF + s, KAPPA)
    y = -p.p_y0 * SQRT2 * eta * cn
    z = math.copysign(1.0, p.lam) * eta ** 3 / 3.0 * (s + 2.0 * sn * cn * dn)
    p_y = p.p_y0 * SQRT2 * sn * dn
    p_z = p.lam + np.zeros_like(t)
    return y, z, p_y, p_z


def nilpotent_geodesic(p: NilpotentGeodesicParams, t):
    """(y, z) at time ``t`` (scalar or array)."""
    y, z, _, _ = nilpotent_state(p, t)
    if np.ndim(t) == 0:
        return float(y), float(z)
    return y, z


def nilpotent_cut_time(lam: float):
    """First return to the z-axis, 2K/sqrt|lam|; None for lam = 0 (never cut)."""
    if lam == 0.0:
        return None
    return 2.0 * K_HALF / math.sqrt(abs(lam))


def nilpotent_conjugate_coefficient() -> float:
    """alpha = K/(2 sqrt 2) from the curve (-sqrt2 eta, K eta^3) written as z = alpha |y|^3."""
    return K_HALF / (2.0 * SQRT2)


def grushin_geodesic(p_x0: float, p_y: float, t):
    """(x, y) on the Grushin geodesic from the origin with covector (p_x0, p_y)."""
    t = np.asarray(t, dtype=float)
    if p_y == 0.0:
        x, y = p_x0 * t, np.zeros_like(t)
    else:
        x = p_x0 * np.sin(p_y * t) / p_y
        y = (2.0 * p_y * t - np.sin(2.0 * p_y * t)) / (2.0 * p_y) ** 2
    if np.ndim(t) == 0:
        return float(x), float(y)
    return x, y


def heisenberg_z(p_x0: float, p_y: float, t):
    """Third coordinate of the Heisenberg lift (p_z = 0) of a Grushin geodesic."""
    if p_y == 0.0:
        return 0.0 * np.asarray(t, dtype=float)
    return p_x0 * (1.0 - np.cos(p_y * np.asarray(t, dtype=float))) / p_y


def tan_fixed_point(n: int = 1) -> float:
    """n-th positive root of tan(u) = u, bracketed in (n pi, n pi + pi/2)."""
    lo = n * math.pi + 1e-12
    hi = n * math.pi + 0.5 * math.pi - 1e-12
    return brentq(lambda u: math.sin(u) - u * math.cos(u), lo, hi, xtol=1e-15, rtol=1e-15)


def grushin_cut_time(p_y: float) -> float:
    return math.pi / abs(p_y)


def grushin_conjugate_time(p_y: float) -> float:
    """First conjugate time of the Grushin plane: p_y t = tan(p_y t)."""
    return tan_fixed_point(1) / abs(p_y)


def heisenberg_tan_conjugate_time(p_y: float) -> float:
    """Conjugate time of the lifted curves: (p_y t)/2 = tan((p_y t)/2)."""
    return 2.0 * tan_fixed_point(1) / abs(p_y)
