"""Complete elliptic integral K and Jacobi elliptic functions sn, cn, dn.

K is evaluated with the arithmetic-geometric mean, the Jacobi functions with
the descending Landen (Gauss) transformation.  Both work elementwise on numpy
arrays; the modulus ``k`` (not the parameter ``m = k**2``) is the argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

#: Modulus of every arc-length geodesic of the tangency models (k**2 = 1/2).
KAPPA = 1.0 / math.sqrt(2.0)
KAPPA_SQ = 0.5

_MAX_LANDEN = 40


@dataclass(frozen=True)
class EllipticModulus:
    k: float

    def __post_init__(self):
        _check_modulus(self.k)

    @property
    def k_prime(self) -> float:
        return math.sqrt(1.0 - self.k * self.k)


class JacobiTriple(NamedTuple):
    sn: np.ndarray | float
    cn: np.ndarray | float
    dn: np.ndarray | float


def _check_modulus(k):
    k_arr = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k_arr)) or np.any(k_arr < 0.0) or np.any(k_arr >= 1.0):
        raise ValueError(f"elliptic modulus must lie in [0, 1), got {k!r}")
    return k_arr


def _as_k(k):
    return k.k if isinstance(k, EllipticModulus) else k


def agm(a, b, tol: float = 1e-16):
    """Arithmetic-geometric mean of positive ``a`` and ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for _ in range(_MAX_LANDEN):
        if np.all(np.abs(a - b) <= tol * np.abs(a)):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return 0.5 * (a + b)


def complete_K(k):
    """Quarter period K(k) = int_0^{pi/2} dphi / sqrt(1 - k^2 sin^2 phi)."""
    k_arr = _check_modulus(_as_k(k))
    k_prime = np.sqrt((1.0 - k_arr) * (1.0 + k_arr))
    out = 0.5 * math.pi / agm(1.0, k_prime)
    return float(out) if out.ndim == 0 else out


#: K(1/sqrt(2)), the quarter period of the nilpotent geodesics.
K_HALF = complete_K(KAPPA)


def jacobi(u, k) -> JacobiTriple:
    """Return ``(sn, cn, dn)`` of argument ``u`` and modulus ``k``.

    Arrays broadcast against each other.  Scalars in give floats out.
    """
    k = _as_k(k)
    u_arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u_arr)):
        raise ValueError("jacobi argument must be finite")
    k_arr = _check_modulus(k)
    u_arr, k_arr = np.broadcast_arrays(u_arr, k_arr)
    scalar = u_arr.ndim == 0

    # Landen ladder a_n, c_n; stop once every c_n has vanished.
    a = np.ones_like(u_arr)
    b = np.sqrt((1.0 - k_arr) * (1.0 + k_arr))
    c = k_arr.copy()
    a_list, c_list = [a], [c]
    for _ in range(_MAX_LANDEN):
        if np.all(np.abs(c) <= 1e-17 * a):
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        a_list.append(a)
        c_list.append(c)
    n = len(a_list) - 1

    phi = (2.0 ** n) * a_list[n] * u_arr
    for i in range(n, 0, -1):
        ratio = np.clip(c_list[i] / a_list[i] * np.sin(phi), -1.0, 1.0)
        phi = 0.5 * (phi + np.arcsin(ratio))

    sn = np.sin(phi)
    cn = np.cos(phi)
    # dn^2 = k'^2 + k^2 cn^2: a sum of non-negative terms, no cancellation.
    dn = np.sqrt((1.0 - k_arr) * (1.0 + k_arr) + k_arr * k_arr * cn * cn)
    if scalar:
        return JacobiTriple(float(sn), float(cn), float(dn))
    return JacobiTriple(sn, cn, dn)
