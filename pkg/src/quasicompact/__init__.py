"""Convergence rates of geometrically ergodic Markov chains in weighted spaces.

Modules
-------
weights
    Weight functions, weighted sup norms and the geometric Lipschitz seminorm.
kernels
    Catalog of transition kernels and iterated function systems.
drift
    Iterated weights, the weak-drift rate and minorization certificates.
spectral
    Spectra of weight-conjugated truncations.
rates
    Closed-form rates for birth-death chains, M/M/1 and reset walks.
ifs
    Contraction constants and certificates for iterated random functions.
verify
    Stationary laws, decay curves and audits of analytic bounds.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from .errors import (  # noqa: E402
    ConvergenceError, DomainError, InfeasibleError, KernelError, QuasicompactError,
    TruncationError, UnsupportedModelError,
)

__all__ = [
    "BACKEND", "ConvergenceError", "DomainError", "InfeasibleError", "KernelError",
    "QuasicompactError", "TruncationError", "UnsupportedModelError", "__version__",
]
