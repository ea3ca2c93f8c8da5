"""Definite determinantal pencils for hyperbolic plane curves.

Build a symmetric linear pencil ``M = xA + yB + zC`` whose determinant is the
curve times a product of lines and which is definite on the hyperbolicity
cone, starting from any interlacer; then certify, rationalize and factor the
Bezout matrix as a sum of squares.
"""
from .certify import Certificate, RegionAgreement, certify_pencil, region_agreement
from .conics import ConicSearchResult, real_contact_conic_search
from .curves import (
    ContactData,
    GenericityReport,
    IntersectionCycle,
    ProjPoint,
    branch_expansion,
    classify_cycle,
    genericity_check,
    intersection_cycle,
)
from .dixon import DixonOptions, DixonResult, LinearPencil, dixon_pipeline
from .errors import (
    GenericityError,
    HypcurveError,
    InconsistentInputError,
    InputError,
    NumericalError,
    PrecisionExhausted,
)
from .forms import TernaryForm, UnivariatePoly, dir_derivative, divide, parse_form, restrict
from .gram import gram_system, low_rank_gram
from .hyperbolic import (
    bezout_multi,
    cone_contains,
    extremal_contact_bound,
    is_hyperbolic,
    is_interlacer,
    wronskian,
)
from .rationalize import RationalizationFailed, RationalPencil, rationalize_pencil, verify_rational
from .sosbez import SosFactor, extract_sos, verify_sos

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
