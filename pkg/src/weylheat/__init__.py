"""Heat kernels of Weyl chambers with mixed Dirichlet/Neumann walls.

Closed forms for orthogonal products and the square/hexagonal planar
chambers, stable against the cancellation of the signed image sum, plus the
tooling that measures two-sided Gaussian bounds and cross-checks everything
against independent numerics.
"""
from .dihedral_kernels import bound_dihedral, g_function, kernel_I3, kernel_I4
from .errors import CheckFailure, ConvergenceError, DomainError, InvalidParameter, WeylHeatError
from .gauss_kernels import EvalPoint, cancellation_diagnostic, kernel_reflection_sum, make_spec
from .orthogonal_kernels import OrthogonalSpec, bound_orthogonal, kernel_orthogonal
from .reflection_core import build_system, enumerate_group, enumerate_homomorphisms

__version__ = "0.1.0"

__all__ = [
    "EvalPoint", "OrthogonalSpec", "build_system", "enumerate_group", "enumerate_homomorphisms",
    "make_spec", "kernel_reflection_sum", "cancellation_diagnostic", "kernel_orthogonal",
    "bound_orthogonal", "kernel_I4", "kernel_I3", "bound_dihedral", "g_function",
    "WeylHeatError", "InvalidParameter", "DomainError", "ConvergenceError", "CheckFailure",
]
