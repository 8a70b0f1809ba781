"""Kernel backend selection.

Set ``MILDFLOW_BACKEND=numpy`` to force the pure-numpy kernels. The default,
``numba``, compiles the loop kernels with ``@njit`` and silently falls back to
numpy when numba cannot be imported.
"""

import os

_VALID = ("numba", "numpy")

REQUESTED = os.environ.get("MILDFLOW_BACKEND", "numba").strip().lower()
if REQUESTED not in _VALID:
    raise ImportError(f"MILDFLOW_BACKEND must be one of {_VALID}, got {REQUESTED!r}")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if (REQUESTED == "numba" and HAVE_NUMBA) else "numpy"


def njit(func):
    """Compile ``func`` in nopython mode when numba is importable."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)
