"""Geodesics, fronts, spheres, conjugate and cut loci of 2-D almost-Riemannian
structures near a tangency point."""

from .elliptic import KAPPA, KAPPA_SQ, K_HALF, complete_K, jacobi
from .models import (
    ArsModel,
    CotangentState,
    LiftedState,
    nilpotent,
    order0,
    f1_coefficient,
    ars_hamiltonian,
    ars_rhs,
    lifted_rhs_order0,
)
from .flow import Trajectory, integrate, exp_map, exp_jacobian_det, first_conjugate_time
from .closedform import NilpotentGeodesicParams, nilpotent_geodesic, nilpotent_cut_time
from .perturb import g_constants, j_first_zero, predicted_cut_point, predicted_alpha
from .acceptance import run_acceptance
from .loci import cut_point_pair, cut_locus, conjugate_locus, compute_front, sphere, fit_cusp

__version__ = "0.1.0"
