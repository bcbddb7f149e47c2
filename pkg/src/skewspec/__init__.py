"""Skew-orthogonal polynomials for real asymmetric random matrix ensembles.

Two families are covered: the elliptic real Ginibre ensemble (Hermite-type
SOP) and the chiral real asymmetric ensemble (Laguerre-type SOP), with
closed-form polynomials, norms, kernels and Cauchy transforms, the massive
(unquenched) generalisations, seeded samplers and independent verification
routes.
"""
from .errors import (
    DegenerateParameterError,
    DomainError,
    NumericalError,
    SingularMassError,
    SkewSpecError,
)
from .ensembles import EnsembleSpec, Model, make_rng, sample_spectrum
from .massive import (
    MassiveContext,
    massive_even_sop,
    massive_kernel,
    massive_norm,
    massive_odd_sop,
    massive_odd_sop_normalized,
)
from .skewlinalg import pfaffian
from .sop import SkewPolyFamily, cauchy_transform, expect_two_dets, kernel_sum
from .weights import MassConvention, QuadratureSpec, WeightSpec, gram_matrix, skew_product

__version__ = "0.1.0"

__all__ = [
    "SkewSpecError",
    "DomainError",
    "DegenerateParameterError",
    "NumericalError",
    "SingularMassError",
    "EnsembleSpec",
    "Model",
    "make_rng",
    "sample_spectrum",
    "MassiveContext",
    "massive_even_sop",
    "massive_odd_sop",
    "massive_odd_sop_normalized",
    "massive_kernel",
    "massive_norm",
    "pfaffian",
    "SkewPolyFamily",
    "cauchy_transform",
    "expect_two_dets",
    "kernel_sum",
    "MassConvention",
    "QuadratureSpec",
    "WeightSpec",
    "gram_matrix",
    "skew_product",
]
