"""Numerical toolkit for model spaces of finite Blaschke products and the
truncated Toeplitz operators acting on them."""
from .clark import ClarkMeasure, clark_measure, embed, unembed, cauchy_reconstruct
from .decompose import (
    Component,
    Decomposition,
    RangeStructure,
    decompose,
    elementary_coefficients,
    find_range_structure,
    fit_coefficients,
    synthesize,
)
from .errors import *  # noqa: F401,F403
from .inner_function import BlaschkeProduct, ahern_clark_sum, deriv, evaluate, frostman_shift
from .linalg import range_basis
from .model_space import (
    AntilinearMap,
    ModelBasis,
    compressed_shift,
    conj_kernel,
    conjugation_matrix,
    eval_vector,
    frostman_unitary,
    kernel,
    tm_basis,
)
from .tto import (
    SymbolSpec,
    SymbolTerm,
    complex_symmetry_residual,
    compress,
    derived_op,
    pair,
    rank_one,
    sarason_test,
)

__version__ = "0.1.0"
