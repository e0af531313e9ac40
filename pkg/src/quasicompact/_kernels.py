"""Pick the compiled kernels when available, else the NumPy fallback."""
import os

if os.environ.get("QUASICOMPACT_PURE_PYTHON"):
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pykernels as _impl
        BACKEND = "python"

m1_pair_max = _impl.m1_pair_max
csr_power_history = _impl.csr_power_history
coupled_affine_moments = _impl.coupled_affine_moments

__all__ = ["BACKEND", "m1_pair_max", "csr_power_history", "coupled_affine_moments"]
