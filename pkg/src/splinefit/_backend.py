"""Kernel backend selection.

The hot numeric loops have two implementations: numba-jitted kernels and a
pure-numpy fallback.  The env var SPLINEFIT_BACKEND forces one of them:

    SPLINEFIT_BACKEND=numpy   always use the numpy fallback
    SPLINEFIT_BACKEND=numba   require numba (ImportError if missing)

Unset, numba is used when importable.
"""

import os


def backend_name() -> str:
    flag = os.environ.get("SPLINEFIT_BACKEND", "").strip().lower()
    if flag not in ("", "numba", "numpy"):
        raise ValueError(f"SPLINEFIT_BACKEND must be 'numba' or 'numpy', got {flag!r}")
    if flag == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if flag == "numba":
            raise
        return "numpy"
    return "numba"
