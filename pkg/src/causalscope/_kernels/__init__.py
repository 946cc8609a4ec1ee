"""Backend dispatch for the hot numeric kernels.

Set ``CAUSALSCOPE_BACKEND=numpy`` to force the pure-numpy path; the default
is the numba JIT path when numba imports cleanly. Both paths are exact and
bit-identical; numba is just faster on the enumeration-heavy workloads.
"""

from __future__ import annotations

import os

from . import numpy_backend

_requested = os.environ.get("CAUSALSCOPE_BACKEND", "numba").strip().lower()

if _requested == "numpy":
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import numba_backend as _impl

        BACKEND = "numba"
    except ImportError:
        _impl = numpy_backend
        BACKEND = "numpy"

product_of_factors = _impl.product_of_factors
ancestral_draw = _impl.ancestral_draw


def backend_name() -> str:
    return BACKEND
