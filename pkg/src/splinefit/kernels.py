"""Dispatch layer for the numeric kernels.

Imports the numba kernels when available (and not disabled via
SPLINEFIT_BACKEND=numpy), otherwise the pure-numpy fallback.  The numpy
module is always importable as `splinefit.kernels.numpy_impl` for
cross-backend tests and the backend benchmark.
"""

import numpy as np

from . import _backend
from . import _kernels_numpy as numpy_impl

BACKEND = _backend.backend_name()

if BACKEND == "numba":
    from . import _kernels_numba as _impl
else:
    _impl = numpy_impl

eval_basis_many = _impl.eval_basis_many
curve_points = _impl.curve_points
curve_jets = _impl.curve_jets
objective_core = _impl.objective_core
nearest_sample_index = _impl.nearest_sample_index
refine_footpoints = _impl.refine_footpoints
two_loop = _impl.two_loop

_warmed = False


def warmup():
    """Trigger JIT compilation of every kernel on tiny inputs.

    No-op for the numpy backend; call before timing anything.
    """
    global _warmed
    if _warmed:
        return
    knots = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0])
    ctrl = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    ts = np.array([0.25, 0.75])
    X = np.array([[0.5, 0.5], [0.2, 0.8]])
    eval_basis_many(knots, 3, ts)
    curve_points(knots, 3, ctrl, ts)
    curve_jets(knots, 3, ctrl, ts)
    objective_core(knots, 3, ctrl, ts, X)
    nearest_sample_index(ctrl, X)
    refine_footpoints(knots, 3, ctrl, X, ts, False, 1e-10, 5)
    two_loop(
        np.array([1.0, 2.0]),
        np.array([[1.0, 0.0]]),
        np.array([[1.0, 0.0]]),
        np.array([1.0]),
        1.0,
    )
    _warmed = True
