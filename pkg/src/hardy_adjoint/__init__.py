"""Composition operators on the Hardy space of the upper half-plane.

Boundedness of rational symbols, Aleksandrov-Clark measures, and the adjoint
of C_phi on H^2 computed by residues, Clark measures and direct quadrature.
"""
__version__ = "0.1.0"

from .errors import ConditioningError, ConsistencyError, HardyError, NotApplicableError, PoleError
from .poly_rational import Poly, RationalMap, RootSet, conj_reflect, poly_roots, preimages_upper
from .boundedness import classify_qlp, classify_rational, is_selfmap
from .quadrature import QuadratureConfig
from .hardy import (
    BoundaryFunction,
    NonConvergenceWarning,
    compose,
    f_p,
    g_p,
    h2_norm,
    inner_product,
    kernel_K,
    kernel_k,
    poisson,
    reproduce,
)
from .ac_measures import ACMeasure, aleksandrov_apply, build_measure
from .adjoint import (
    AdjointResult,
    adjoint,
    adjoint_boundary_ac,
    adjoint_integral,
    adjoint_residue,
    duality_gap,
    isometry_defect,
)
from .transfer import J, J_inv, V, V_inv, transfer_check, weighted_comp_disc
