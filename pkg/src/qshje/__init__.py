"""Solutions of the quantum stationary Hamilton-Jacobi equation built from Schrodinger bases.

Modules
-------
basis1d
    Independent 1D solution pairs (analytic or Numerov) and bound-state search.
product_basis
    Product solutions of separable 2D/3D problems and the action parameters.
reduced_action
    ``S0``, ``R``, their gradients and equation residuals.
invariance
    Parameter transformation under a change of basis and the rank count.
microstates
    Coefficient identification and real-case families.
trajectories
    Integration of ``m dx/dt = grad S0``.
"""

__version__ = "0.1.0"

from .basis1d import BasisPair, analytic_pair, find_bound_energy, solve_numerov
from .errors import (DegenerateInput, InvalidInput, NotRepresentable, NumericalFailure, QshjeError,
                     UndefinedPhase)
from .kernels import BACKEND
from .potentials import PhysicalConstants, Potential1D
from .product_basis import ActionParams, ProductBasis, SeparableSpec, build_products
from .reduced_action import QshjeSolution, eval_r, eval_s0, grad_s0, residual_qshje

__all__ = [
    "BACKEND",
    "ActionParams",
    "BasisPair",
    "DegenerateInput",
    "InvalidInput",
    "NotRepresentable",
    "NumericalFailure",
    "PhysicalConstants",
    "Potential1D",
    "ProductBasis",
    "QshjeError",
    "QshjeSolution",
    "SeparableSpec",
    "UndefinedPhase",
    "analytic_pair",
    "build_products",
    "eval_r",
    "eval_s0",
    "find_bound_energy",
    "grad_s0",
    "residual_qshje",
    "solve_numerov",
]
