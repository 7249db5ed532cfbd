"""Almost-Riemannian models near a tangency point and their Hamiltonian flows.

The structure is given by the orthonormal frame

    F1 = f(y, z) d/dz,   F2 = d/dy,   f = eps*z + y**2/2 + eps'*y**3 + sum c*y**i*z**j

with y of weight 1 and z of weight 3.  ``eps = eps' = 0`` is the nilpotent
approximation.  Cotangent states are numpy vectors ``(y, z, p_y, p_z)``; lifted
states of the 3-D desingularized structure are ``(x, y, z, p_x, p_y, p_z)``.

The Grushin plane and the Heisenberg group appear as fixed auxiliary models
with states ``(x, y, p_x, p_y)`` and ``(x, y, z, p_x, p_y, p_z)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq


class CotangentState(NamedTuple):
    y: float
    z: float
    p_y: float
    p_z: float


class LiftedState(NamedTuple):
    x: float
    y: float
    z: float
    p_x: float
    p_y: float
    p_z: float


@dataclass(frozen=True)
class ArsModel:
    """Order-0 tangency model plus optional higher-order monomials.

    ``higher_terms`` holds ``(i, j, c)`` triples meaning ``c * y**i * z**j``;
    each must have weighted order ``i + 3*j >= 4``.
    """

    epsilon: float = 0.0
    epsilon_prime: float = 0.0
    higher_terms: tuple = ()
    name: str = "order0"
    _monomials: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        terms = []
        for term in self.higher_terms:
            i, j, c = term
            if int(i) != i or int(j) != j or i < 0 or j < 0:
                raise ValueError(f"monomial exponents must be non-negative integers: {term!r}")
            if i + 3 * j < 4:
                raise ValueError(f"higher term y^{i} z^{j} has weighted order {i + 3 * j} < 4")
            terms.append((int(i), int(j), float(c)))
        object.__setattr__(self, "higher_terms", tuple(terms))
        monomials = [(2, 0, 0.5)]
        if self.epsilon != 0.0:
            monomials.append((0, 1, float(self.epsilon)))
        if self.epsilon_prime != 0.0:
            monomials.append((3, 0, float(self.epsilon_prime)))
        monomials.extend(t for t in terms if t[2] != 0.0)
        object.__setattr__(self, "_monomials", tuple(monomials))

    @property
    def is_nilpotent(self) -> bool:
        return self.epsilon == 0.0 and self.epsilon_prime == 0.0 and not self.higher_terms

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "epsilon": self.epsilon,
            "epsilon_prime": self.epsilon_prime,
            "higher_terms": [list(t) for t in self.higher_terms],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ArsModel":
        return cls(
            epsilon=float(data.get("epsilon", 0.0)),
            epsilon_prime=float(data.get("epsilon_prime", 0.0)),
            higher_terms=tuple(tuple(t) for t in data.get("higher_terms", [])),
            name=str(data.get("name", "order0")),
        )

    @classmethod
    def load(cls, path) -> "ArsModel":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def nilpotent() -> ArsModel:
    return ArsModel(0.0, 0.0, (), "nilpotent")


def order0(epsilon: float = 1.0, epsilon_prime: float = 0.0) -> ArsModel:
    return ArsModel(epsilon, epsilon_prime, (), "order0")


def normal_form_to_model(psi0: float, dpsi0: float, xi0: float, dxi_dy0: float):
    """Order-0 invariants ``(eps, eps')`` from the tangency normal form data.

    ``psi0 = psi(0) > 0``, ``dpsi0 = psi'(0)``, ``xi0 = xi(0)`` and
    ``dxi_dy0 = d xi/dy (0)``.
    """
    if not psi0 > 0.0:
        raise ValueError("psi(0) must be positive at a tangency point")
    epsilon = math.exp(xi0)
    epsilon_prime = (dpsi0 + psi0 * dxi_dy0) / (2.0 * psi0)
    return epsilon, epsilon_prime


def _f_derivs(m: ArsModel, y: float, z: float):
    """f and its partial derivatives up to order 2: (f, fy, fz, fyy, fyz, fzz)."""
    f = fy = fz = fyy = fyz = fzz = 0.0
    for i, j, c in m._monomials:
        yi = y ** i
        zj = z ** j
        f += c * yi * zj
        if i >= 1:
            yi1 = y ** (i - 1)
            fy += c * i * yi1 * zj
            if i >= 2:
                fyy += c * i * (i - 1) * y ** (i - 2) * zj
            if j >= 1:
                fyz += c * i * j * yi1 * z ** (j - 1)
        if j >= 1:
            fz += c * j * yi * z ** (j - 1)
            if j >= 2:
                fzz += c * j * (j - 1) * yi * z ** (j - 2)
    return f, fy, fz, fyy, fyz, fzz


def _f_first(m: ArsModel, y: float, z: float):
    f = fy = fz = 0.0
    for i, j, c in m._monomials:
        yi = y ** i
        zj = z ** j
        f += c * yi * zj
        if i:
            fy += c * i * y ** (i - 1) * zj
        if j:
            fz += c * j * yi * z ** (j - 1)
    return f, fy, fz


def f1_coefficient(m: ArsModel, y, z):
    """Coefficient f(y, z) of d/dz in the first frame field (array friendly)."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    out = np.zeros(np.broadcast(y, z).shape)
    for i, j, c in m._monomials:
        out = out + c * y ** i * z ** j
    return float(out) if out.ndim == 0 else out


def ars_hamiltonian(m: ArsModel, s) -> float:
    y, z, p_y, p_z = s
    f = f1_coefficient(m, y, z)
    return 0.5 * (p_z * p_z * f * f + p_y * p_y)


def ars_rhs(m: ArsModel, s) -> np.ndarray:
    """Hamiltonian vector field of ``ars_hamiltonian``."""
    y, z, p_y, p_z = s
    f, fy, fz = _f_first(m, y, z)
    pz2f = p_z * p_z * f
    return np.array([p_y, p_z * f * f, -pz2f * fy, -pz2f * fz])


def ars_jacobian(m: ArsModel, s) -> np.ndarray:
    """Jacobian matrix of ``ars_rhs`` with respect to ``(y, z, p_y, p_z)``."""
    y, z, p_y, p_z = s
    f, fy, fz, fyy, fyz, fzz = _f_derivs(m, y, z)
    pz2 = p_z * p_z
    return np.array([
        [0.0, 0.0, 1.0, 0.0],
        [2.0 * p_z * f * fy, 2.0 * p_z * f * fz, 0.0, f * f],
        [-pz2 * (fy * fy + f * fyy), -pz2 * (fz * fy + f * fyz), 0.0, -2.0 * p_z * f * fy],
        [-pz2 * (fy * fz + f * fyz), -pz2 * (fz * fz + f * fzz), 0.0, -2.0 * p_z * f * fz],
    ])


def lifted_hamiltonian(m: ArsModel, s) -> float:
    x, y, z, p_x, p_y, p_z = s
    p1 = p_x + f1_coefficient(m, y, z) * p_z
    return 0.5 * (p1 * p1 + p_y * p_y)


def lifted_rhs_order0(m: ArsModel, s) -> np.ndarray:
    """Normal extremal flow of the desingularized frame ``d/dx + f d/dz, d/dy``.

    H = (P1**2 + P2**2)/2 with P1 = p_x + f p_z and P2 = p_y.  Nothing depends
    on x, so p_x is a first integral.
    """
    x, y, z, p_x, p_y, p_z = s
    f, fy, fz = _f_first(m, y, z)
    p1 = p_x + f * p_z
    return np.array([p1, p_y, f * p1, 0.0, -p1 * p_z * fy, -p1 * p_z * fz])


def singular_set_z(m: ArsModel, y: float, bracket: float = 1.0):
    """z on the singular set {f = 0} above abscissa ``y``.

    For ``eps == 0`` the order-0 singular set is the axis ``{y = 0}``, which is
    not a graph over y, and ``None`` is returned.  Higher terms are handled by
    a root search in ``[z0 - bracket, z0 + bracket]`` around the order-0 root;
    ``None`` if no sign change is found there.
    """
    if m.epsilon == 0.0:
        return None
    z0 = -(0.5 * y * y + m.epsilon_prime * y ** 3) / m.epsilon
    if not m.higher_terms:
        return z0
    g = lambda z: f1_coefficient(m, y, z)
    if g(z0) == 0.0:
        return z0
    lo, hi = z0 - bracket, z0 + bracket
    if g(lo) * g(hi) > 0.0:
        return None
    return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


# Auxiliary models: Grushin plane and Heisenberg group.

def grushin_hamiltonian(s) -> float:
    x, y, p_x, p_y = s
    return 0.5 * (p_x * p_x + x * x * p_y * p_y)


def grushin_rhs(s) -> np.ndarray:
    """Flow of H = (p_x^2 + x^2 p_y^2)/2 for the frame d/dx, x d/dy."""
    x, y, p_x, p_y = s
    return np.array([p_x, x * x * p_y, -x * p_y * p_y, 0.0])


def grushin_jacobian(s) -> np.ndarray:
    x, y, p_x, p_y = s
    return np.array([
        [0.0, 0.0, 1.0, 0.0],
        [2.0 * x * p_y, 0.0, 0.0, x * x],
        [-p_y * p_y, 0.0, 0.0, -2.0 * x * p_y],
        [0.0, 0.0, 0.0, 0.0],
    ])


def heisenberg_hamiltonian(s) -> float:
    x, y, z, p_x, p_y, p_z = s
    w = x * p_y + p_z
    return 0.5 * (p_x * p_x + w * w)


def heisenberg_rhs(s) -> np.ndarray:
    """Flow of H = (p_x^2 + (x p_y + p_z)^2)/2 for the frame d/dx, x d/dy + d/dz."""
    x, y, z, p_x, p_y, p_z = s
    w = x * p_y + p_z
    return np.array([p_x, x * w, w, -p_y * w, 0.0, 0.0])


def heisenberg_jacobian(s) -> np.ndarray:
    x, y, z, p_x, p_y, p_z = s
    w = x * p_y + p_z
    return np.array([
        [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        [w + x * p_y, 0.0, 0.0, 0.0, x * x, x],
        [p_y, 0.0, 0.0, 0.0, x, 1.0],
        [-p_y * p_y, 0.0, 0.0, 0.0, -(w + x * p_y), -p_y],
        [0.0] * 6,
        [0.0] * 6,
    ])
