"""Small-eta expansion of the exponential map at the tangency point.

Geodesics with p_z(0) = +-1/eta**2 are written in the rescaled time s = t/eta as

    y = eta (Y0 + eta Y1 + ...),   z = eta**3 (Z0 + eta Z1 + ...)

(Y0, Z0, P_Y0, P_Z0) is the nilpotent flow, (Y1, Z1, P_Y1, P_Z1) its first
correction for eps' = 0, and g1, g2, g3 the eps'-sensitivities so that the
full first-order terms are Y1 + eps' g1, Z1 + eps' g2, P_Y1 + eps' g3, P_Z1.
"""

from __future__ import annotations

import functools
import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .elliptic import KAPPA, K_HALF, jacobi
from .flow import Trajectory, integrate
from .models import ArsModel

SQRT2 = math.sqrt(2.0)
PERTURB_TOL = 1e-10


class PerturbState(NamedTuple):
    Y0: float
    Z0: float
    PY0: float
    PZ0: float
    Y1: float
    Z1: float
    PY1: float
    PZ1: float
    g1: float
    g2: float
    g3: float

    def first_order(self, epsilon_prime: float):
        """First-order terms (Y1, Z1, P_Y1, P_Z1) including the eps' corrections."""
        return (self.Y1 + epsilon_prime * self.g1, self.Z1 + epsilon_prime * self.g2,
                self.PY1 + epsilon_prime * self.g3, self.PZ1)


def initial_perturb_state(sign_py: int = 1, sign_pz: int = 1) -> np.ndarray:
    return np.array([0.0, 0.0, float(sign_py), float(sign_pz)] + [0.0] * 7)


def expansion_rhs(epsilon: float, epsilon_prime_first_order: float = 0.0):
    """Vector field of the joint (order-0, order-1, g) system in s.

    The order-1 block uses ``epsilon`` and ``epsilon_prime_first_order``
    (zero in the g decomposition).
    """
    eps = float(epsilon)
    epp = float(epsilon_prime_first_order)

    def rhs(u):
        Y, Z, PY, PZ, Y1, Z1, PY1, PZ1, g1, g2, g3 = u
        Y2 = Y * Y
        Y3 = Y2 * Y
        Y4 = Y3 * Y
        Y5 = Y4 * Y
        return np.array([
            PY,
            PZ * Y4 / 4.0,
            -PZ * PZ * Y3 / 2.0,
            0.0,
            PY1,
            PZ1 * Y4 / 4.0 + PZ * (Y3 * Y1 + eps * Z * Y2 + epp * Y5),
            -PZ * PZ1 * Y3 - PZ * PZ * (1.5 * Y2 * Y1 + eps * Z * Y + 2.5 * epp * Y4),
            -0.5 * PZ * PZ * eps * Y2,
            g3,
            PZ * (g1 * Y3 + Y5),
            -PZ * PZ * (1.5 * Y2 * g1 + 2.5 * Y4),
        ])

    return rhs


def integrate_expansion(m: ArsModel, sign_py: int = 1, sign_pz: int = 1, s_end: float = 2 * K_HALF,
                        tol: float = PERTURB_TOL) -> Trajectory:
    """Integrate the expansion systems for model ``m`` on [0, s_end]."""
    if sign_py not in (1, -1) or sign_pz not in (1, -1):
        raise ValueError("sign_py and sign_pz must be +1 or -1")
    if not s_end > 0.0:
        raise ValueError("s_end must be positive")
    return integrate(expansion_rhs(m.epsilon), initial_perturb_state(sign_py, sign_pz), s_end, tol,
                     atol=0.01 * tol, model_name=f"{m.name}:expansion")


def expansion_at(m: ArsModel, s: float, sign_py: int = 1, sign_pz: int = 1,
                 tol: float = PERTURB_TOL) -> PerturbState:
    if s == 0.0:
        return PerturbState(*initial_perturb_state(sign_py, sign_pz))
    return PerturbState(*map(float, integrate_expansion(m, sign_py, sign_pz, s, tol).final))


@functools.lru_cache(maxsize=8)
def g_constants(tol: float = PERTURB_TOL):
    """(g1, g2, g3) at s = 2K for the upper branch (P_Y0(0) = P_Z0 = 1)."""
    st = expansion_at(ArsModel(name="nilpotent"), 2.0 * K_HALF, 1, 1, tol)
    return st.g1, st.g2, st.g3


def nilpotent_profile(s):
    """Closed-form (Y0, Z0, P_Y0) for P_Y0(0) = P_Z0 = 1."""
    sn, cn, dn = jacobi(K_HALF + np.asarray(s, dtype=float), KAPPA)
    s = np.asarray(s, dtype=float)
    return -SQRT2 * cn, (s + 2.0 * sn * cn * dn) / 3.0, SQRT2 * sn * dn


def j_function(s):
    """j(s) = Y0 Z0' - 3 Z0 Y0'; the exponential-map Jacobian is eta^3 j(s) + ..."""
    Y, Z, PY = nilpotent_profile(s)
    out = Y * Y ** 4 / 4.0 - 3.0 * Z * PY
    return float(out) if np.ndim(out) == 0 else out


def j_derivative(s):
    """j'(s) = Y0 Z0'' - 2 Y0' Z0' - 3 Z0 Y0'' using Y0'' = -Y0^3/2, Z0' = Y0^4/4."""
    Y, Z, PY = nilpotent_profile(s)
    out = Y * Y ** 3 * PY - 2.0 * PY * Y ** 4 / 4.0 + 1.5 * Z * Y ** 3
    return float(out) if np.ndim(out) == 0 else out


@functools.lru_cache(maxsize=8)
def j_first_zero(tol: float = 1e-14):
    """First positive zero s0 of j and the transversality value j'(s0)."""
    s_grid = np.linspace(0.0, 4.0 * K_HALF, 801)[1:]
    vals = j_function(s_grid)
    sign_change = np.nonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))[0]
    if len(sign_change) == 0:
        raise RuntimeError("j(s) has no sign change in (0, 4K]")
    i = sign_change[0]
    s0 = brentq(j_function, s_grid[i], s_grid[i + 1], xtol=tol, rtol=1e-15)
    return float(s0), j_derivative(s0)


def matching_shifts(m: ArsModel, tol: float = PERTURB_TOL):
    """Leading-order shifts (c, c') of the two matched geodesic families.

    The geodesics are indexed by eta = eta0 (1 + c eta0) (p_y = 1) and
    eta0 (1 + c' eta0) (p_y = -1) at the common time 2K eta0.
    """
    g1, g2, _ = g_constants(tol)
    y1 = expansion_at(m, 2.0 * K_HALF, 1, 1, tol).Y1
    epp = m.epsilon_prime
    c = -(epp * g2 + y1) / (2.0 * K_HALF)
    c_prime = (epp * g2 - y1) / (2.0 * K_HALF)
    return c, c_prime


def predicted_cut_point(m: ArsModel, eta0: float, branch: str = "upper", tol: float = PERTURB_TOL):
    """Leading-order cut point (y_cut, z_cut) for the geodesic parameter eta0.

    Upper branch: (eta0^2 eps' (g1 - g2), eta0^3 2K/3).  Lower branch:
    (eta0^2 eps' (g1 + g2), -eta0^3 2K/3).  The computed lower branch
    follows ``matched_cut_coefficient`` instead, see there.
    """
    if m.epsilon == 0.0:
        raise ValueError("the perturbative cut point needs eps != 0")
    if not eta0 > 0.0:
        raise ValueError("eta0 must be positive")
    g1, g2, _ = g_constants(tol)
    if branch == "upper":
        return eta0 ** 2 * m.epsilon_prime * (g1 - g2), eta0 ** 3 * 2.0 * K_HALF / 3.0
    if branch == "lower":
        return eta0 ** 2 * m.epsilon_prime * (g1 + g2), -eta0 ** 3 * 2.0 * K_HALF / 3.0
    raise ValueError(f"unknown branch {branch!r}")


def matched_cut_coefficient(m: ArsModel, tol: float = PERTURB_TOL) -> float:
    """eps' (g1 - g2)(2K): leading y_cut / eta0^2 on either branch.

    The reflection z -> -z maps the model (eps, eps') to (-eps, eps') and the
    lower branch to the upper one; the leading y_cut does not involve eps.
    """
    g1, g2, _ = g_constants(tol)
    return m.epsilon_prime * (g1 - g2)


def predicted_alpha(m: ArsModel, branch: str = "upper", tol: float = PERTURB_TOL) -> float:
    """alpha in z^2 = alpha y^3 from the leading cut point, per branch."""
    if m.epsilon_prime == 0.0:
        raise ValueError("the cusp degenerates when eps' = 0")
    g1, g2, _ = g_constants(tol)
    g = g1 - g2 if branch == "upper" else g1 + g2 if branch == "lower" else None
    if g is None:
        raise ValueError(f"unknown branch {branch!r}")
    return 4.0 * K_HALF ** 2 / (9.0 * m.epsilon_prime ** 3 * g ** 3)


def constants_report(m: ArsModel | None = None, tol: float = PERTURB_TOL) -> dict:
    """Numbers behind the cut and conjugate asymptotics, as a flat dict."""
    m = m if m is not None else ArsModel(1.0, 0.0, (), "order0")
    s0, jp = j_first_zero()
    g1, g2, g3 = g_constants(tol)
    st = expansion_at(m, 2.0 * K_HALF, 1, 1, tol)
    return {
        "K": K_HALF,
        "s0": s0,
        "j_prime_s0": jp,
        "g1_2K": g1,
        "g2_2K": g2,
        "g3_2K": g3,
        "Y1_2K": st.Y1,
        "Z1_2K": st.Z1,
    }


__all__ = [
    "PerturbState", "integrate_expansion", "expansion_at", "g_constants", "j_function",
    "j_derivative", "j_first_zero", "predicted_cut_point", "predicted_alpha",
    "matched_cut_coefficient", "matching_shifts", "constants_report",
]
