"""Carleman linearization for semi-explicit differential-algebraic systems.

Typical pipeline::

    model = load_fixture("test2")
    eq, coeffs = analyze(model)
    system, reduced = carleman_dae(coeffs, order=3)
    reduced.Ftilde11      # linear ODE on [dx, dx^[2], dx^[3]]
"""
from .carleman_dae import (
    CarlemanDaeSystem,
    DetReport,
    ReducedOde,
    assemble,
    build_g_blocks,
    build_h_blocks,
    carleman_dae,
    det_product_check,
    kron_reduce,
    percent_error,
    validate_against_ode,
)
from .carleman_ode import CarlemanOdeSystem, build_extended_ode, ode_from_coefficients
from .errors import (
    CarlemanError,
    ConvergenceError,
    DomainError,
    ModelError,
    ParseError,
    RegularityError,
    ShapeError,
)
from .expr import ModelSpec, differentiate, evaluate, load_model, parse_expr, parse_model, to_string
from .fixtures import FIXTURES, load_fixture
from .kron import (
    axis_permutation,
    canonical_order,
    carleman_block,
    commutation_matrix,
    condense,
    condensed_state_matrix,
    kron_power_vec,
    to_canonical,
)
from .simulate import Trajectory, compare, simulate_dae, simulate_linear
from .spectral import combination_spectrum, eigenvalues, match_spectra, mode_report
from .taylor import CoefficientSet, Equilibrium, analyze, coefficient_matrices, fd_oracle, find_equilibrium

__version__ = "0.1.0"

__all__ = [
    "CarlemanDaeSystem",
    "CarlemanError",
    "CarlemanOdeSystem",
    "CoefficientSet",
    "ConvergenceError",
    "DetReport",
    "DomainError",
    "Equilibrium",
    "FIXTURES",
    "ModelError",
    "ModelSpec",
    "ParseError",
    "ReducedOde",
    "RegularityError",
    "ShapeError",
    "Trajectory",
    "analyze",
    "assemble",
    "axis_permutation",
    "build_extended_ode",
    "build_g_blocks",
    "build_h_blocks",
    "canonical_order",
    "carleman_block",
    "carleman_dae",
    "coefficient_matrices",
    "combination_spectrum",
    "commutation_matrix",
    "compare",
    "condense",
    "condensed_state_matrix",
    "det_product_check",
    "differentiate",
    "eigenvalues",
    "evaluate",
    "fd_oracle",
    "find_equilibrium",
    "kron_power_vec",
    "kron_reduce",
    "load_fixture",
    "load_model",
    "match_spectra",
    "mode_report",
    "ode_from_coefficients",
    "parse_expr",
    "parse_model",
    "percent_error",
    "simulate_dae",
    "simulate_linear",
    "to_canonical",
    "to_string",
    "validate_against_ode",
]
