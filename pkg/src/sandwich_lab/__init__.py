"""Degree-p Frobenius sandwiches of P^2 and Hirzebruch surfaces."""

__version__ = "0.1.0"

from .atlas import (
    NormalFormCoefficients,
    ProductNormalForm,
    SurfaceAtlas,
    atlas_for,
    boundary_orders,
    foliation_degree_p2,
    hirzebruch,
    normal_form_check,
    projective_plane,
    singular_locus,
    transport,
)
from .classifier import (
    CanonicalForm,
    ClassificationReport,
    Obstruction,
    P2NormalForm,
    ReductionError,
    canonical_to_fan,
    classify_surface,
    gfr_verdict,
    reduce,
    replay,
    sandwich_report,
)
from .derivation import Derivation, is_p_closed, normalize, parse_derivation, splitting_projector
from .field_poly import Poly, RatFunc
from .invariants import algebra_generators, kernel_basis, local_type, presentation
from .toric import Cone2D, Fan, build_fan, cyclic_type, fan_isomorphic, refine

__all__ = [name for name in dir() if not name.startswith("_")]
