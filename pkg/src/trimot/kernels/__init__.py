"""Hot kernels, dispatched to numba or numpy per ``TRIMOT_DISABLE_NUMBA``."""

from .._accel import USE_NUMBA, backend_name
from . import _numpy

if USE_NUMBA:
    from . import _numba as _active
else:
    _active = _numpy

chain_dp = _active.chain_dp
ssp_matching = _active.ssp_matching
fp_array = _numpy.fp_array

__all__ = ["chain_dp", "ssp_matching", "fp_array", "backend_name", "USE_NUMBA"]
