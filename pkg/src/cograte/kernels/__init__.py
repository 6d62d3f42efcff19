"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Set ``COGRATE_NUMBA=0`` (or
``false``/``off``/``no``) to force the numpy path; the numba path is used
otherwise whenever numba imports cleanly. Both backends stay importable as
``numpy_backend`` / ``numba_backend`` so tests and benchmarks can compare
them directly.
"""

import os

from . import _numpy as numpy_backend

try:
    from . import _numba as numba_backend
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_backend = None


def _numba_requested():
    flag = os.environ.get("COGRATE_NUMBA", "1").strip().lower()
    return flag not in {"0", "false", "off", "no"}


USE_NUMBA = numba_backend is not None and _numba_requested()
backend = numba_backend if USE_NUMBA else numpy_backend
BACKEND_NAME = "numba" if USE_NUMBA else "numpy"

gammainc_lower = backend.gammainc_lower
e1_scaled = backend.e1_scaled
expected_log = backend.expected_log
energy_pair = backend.energy_pair
ar1_recursion = backend.ar1_recursion

__all__ = [
    "BACKEND_NAME",
    "USE_NUMBA",
    "ar1_recursion",
    "backend",
    "e1_scaled",
    "energy_pair",
    "expected_log",
    "gammainc_lower",
    "numba_backend",
    "numpy_backend",
]
