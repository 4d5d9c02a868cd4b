"""Gaussian random graphs, truncated-Gaussian calculus and exponent
optimisation for off-diagonal Ramsey lower bounds."""

from .exceptions import DomainError, NoCrossingError
from .params import ModelParams, build_params, derived_constants, solve_c_p, solve_p_C
from .truncgauss import TruncatedGaussian

__version__ = "0.1.0"

__all__ = [
    "DomainError", "NoCrossingError", "ModelParams", "TruncatedGaussian",
    "build_params", "derived_constants", "solve_c_p", "solve_p_C",
]
