"""Kernel backend selection.

The hot numeric loops in :mod:`pbextremal._kernels` are written as plain
loops over float64 arrays so the identical source can run in two ways:

* compiled with numba's ``@njit`` (default when numba imports cleanly),
* as ordinary Python/numpy functions (the fallback path).

Set ``PB_EXTREMAL_BACKEND=numpy`` to force the fallback, or
``PB_EXTREMAL_BACKEND=numba`` to insist on compilation.  The variable is
read once, at import time.  Because both paths execute the same operations
in the same order, results agree across backends; only speed differs.
"""

from __future__ import annotations

import os
import warnings

ENV_VAR = "PB_EXTREMAL_BACKEND"

_requested = os.environ.get(ENV_VAR, "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    warnings.warn(
        f"{ENV_VAR}={_requested!r} not recognised (expected 'numba' or 'numpy'); "
        "using the default backend",
        stacklevel=2,
    )
    _requested = ""

USING_NUMBA = False
_njit = None
if _requested != "numpy":
    try:
        from numba import njit as _njit

        USING_NUMBA = True
    except ImportError:
        if _requested == "numba":
            warnings.warn(
                f"{ENV_VAR}=numba but numba is not importable; "
                "falling back to the pure-numpy path",
                stacklevel=2,
            )

BACKEND = "numba" if USING_NUMBA else "numpy"


def jit(func):
    """Compile ``func`` with numba when the numba backend is active.

    On the numpy backend this is the identity, so the wrapped function runs
    as-is.  Compiled functions keep the original accessible as ``.py_func``.
    """
    if USING_NUMBA:
        return _njit(cache=True, nogil=True)(func)
    return func
