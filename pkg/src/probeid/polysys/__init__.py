"""Exact polynomial algebra over Q: lex Groebner bases, elimination, radicals,
Sturm sequences, certified roots and real solutions of zero-dimensional systems."""
from .certify import CertifiedRoot, Interval, krawczyk_certify, numeric_real_roots
from .groebner import (
    DEFAULT_REDUCTION_CAP,
    AlgebraCapExceeded,
    GroebnerBasis,
    Ideal,
    NotReduced,
    buchberger,
    divide_multi,
    groebner,
    is_groebner,
    normal_form,
    reduce_basis,
    s_polynomial,
)
from .poly import MonomialOrder, MultiPoly, PolyRing, Rational, RingMismatch, as_rational
from .solve import (
    NotShapeLemma,
    PositiveDimensional,
    RealSolution,
    ShapeClass,
    classify_shape,
    elimination_generator,
    enumerate_real_solutions,
    is_zero_dimensional,
    minimal_polynomial,
    radical_basis,
    radical_zero_dim,
    shape_with_separating_form,
    standard_monomials,
)
from .univariate import (
    RootInterval,
    SturmSequence,
    UniPoly,
    companion_real_root_count,
    isolate_real_roots,
    sign_at_root,
    squarefree_part,
    sturm_count,
    sturm_sequence,
)

__all__ = [
    "CertifiedRoot", "Interval", "krawczyk_certify", "numeric_real_roots", "DEFAULT_REDUCTION_CAP",
    "AlgebraCapExceeded", "GroebnerBasis", "Ideal", "NotReduced", "buchberger", "divide_multi",
    "groebner", "is_groebner", "normal_form", "reduce_basis", "s_polynomial", "MonomialOrder",
    "MultiPoly", "PolyRing", "Rational", "RingMismatch", "as_rational", "NotShapeLemma",
    "PositiveDimensional", "RealSolution", "ShapeClass", "classify_shape", "elimination_generator",
    "enumerate_real_solutions", "is_zero_dimensional", "minimal_polynomial", "radical_basis",
    "radical_zero_dim", "shape_with_separating_form", "standard_monomials", "RootInterval",
    "SturmSequence", "UniPoly", "companion_real_root_count", "isolate_real_roots", "sign_at_root",
    "squarefree_part", "sturm_count", "sturm_sequence",
]
