"""Weighted Bergman projections and the approximation of functions on totally
real zero sets E = {phi = 0}, with numerical checks of the accompanying
L^2, uniform and Agmon-type estimates."""

from .bergman import (
    Basis,
    DegenerateBasis,
    OrthoFactor,
    Projection,
    TestFunction,
    bergman_kernel,
    gram_matrix,
    inner_product,
    make_basis,
    orthonormal_factor,
    orthonormalize,
    refine_factor,
    project,
    project_adaptive,
    residual,
    standard_bump,
)
from .geometry import CompactK, EmptyZeroSet, Quadrature, Rect, build_grid, sample_zero_set, shrink_to_compact
from .weights import Weight, chi_k, make_model_weight, psi, rescale_for_agmon, verify_plurisubharmonic

__version__ = "0.1.0"
