"""Point-to-curve projection.

Dense sampling seeds a per-point Gauss-Newton refinement of the location
parameter; an accepted refinement step must strictly decrease the
point-to-curve distance.  Refinement stops when the orthogonality defect
|(X - P(t)) . P'(t)| drops below 1e-10.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .geometry import BSplineCurve, evaluate_jet_many

log = logging.getLogger(__name__)

ORTHO_TOL = 1e-10
MAX_REFINE_ITER = 100


@dataclass(frozen=True)
class FootpointFrame:
    """Local frame at a candidate foot point.

    `normal` points away from the center of curvature, so signed_d >= 0
    means the query point lies on the convex side of the curve.
    """

    t: float
    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    curvature_radius: float
    signed_d: float


class Projection(NamedTuple):
    params: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray


def dense_parameter_samples(curve: BSplineCurve, samples_per_span: int) -> np.ndarray:
    """Uniform parameter samples, samples_per_span per knot span."""
    if samples_per_span < 2:
        raise ValueError("samples_per_span must be >= 2")
    total = curve.n_spans * samples_per_span
    if curve.closed:
        return np.linspace(0.0, 1.0, total, endpoint=False)
    return np.linspace(0.0, 1.0, total + 1)


def project_all(curve: BSplineCurve, points, samples_per_span: int = 32) -> Projection:
    """Closest-point parameters for every data point.

    Every local minimum of the sampled distance profile seeds a refinement;
    the candidate with the smallest refined distance wins (ties broken by
    lower sample index).  This keeps the result within refinement accuracy of
    the true global closest point even when several branches of the curve
    compete for a query point.
    """
    X = np.asarray(points, dtype=np.float64)
    ts = dense_parameter_samples(curve, samples_per_span)
    samples = kernels.curve_points(curve.knots, curve.degree, curve.control_points, ts)
    D = (np.sum(X * X, axis=1)[:, None] + np.sum(samples * samples, axis=1)[None, :]
         - 2.0 * X @ samples.T)
    if curve.closed:
        is_min = (D <= np.roll(D, 1, axis=1)) & (D <= np.roll(D, -1, axis=1))
    else:
        is_min = np.empty_like(D, dtype=bool)
        is_min[:, 1:-1] = (D[:, 1:-1] <= D[:, :-2]) & (D[:, 1:-1] <= D[:, 2:])
        is_min[:, 0] = D[:, 0] <= D[:, 1]
        is_min[:, -1] = D[:, -1] <= D[:, -2]
    rows, cols = np.nonzero(is_min)
    t_c, resid_c, ok_c = kernels.refine_footpoints(
        curve.knots, curve.degree, curve.control_points, X[rows], ts[cols],
        curve.closed, ORTHO_TOL, MAX_REFINE_ITER,
    )
    pts = kernels.curve_points(curve.knots, curve.degree, curve.control_points, t_c)
    d_c = np.linalg.norm(pts - X[rows], axis=1)
    order = np.lexsort((cols, d_c, rows))
    _, first = np.unique(rows[order], return_index=True)
    sel = order[first]
    t, resid, ok = t_c[sel], resid_c[sel], ok_c[sel]
    if not np.all(ok):
        log.debug("foot-point refinement left %d/%d points above tolerance",
                  int(np.sum(~ok)), X.shape[0])
    return Projection(t, resid, ok)


def refine_all(curve: BSplineCurve, points, seeds) -> Projection:
    """Refinement only, reusing caller-provided seed parameters."""
    X = np.asarray(points, dtype=np.float64)
    t, resid, ok = kernels.refine_footpoints(
        curve.knots, curve.degree, curve.control_points, X,
        np.asarray(seeds, dtype=np.float64), curve.closed,
        ORTHO_TOL, MAX_REFINE_ITER,
    )
    return Projection(t, resid, ok)


def refine_footpoint(curve: BSplineCurve, point, t0: float):
    """Single-point refinement; returns (t, converged)."""
    X = np.asarray(point, dtype=np.float64).reshape(1, 2)
    t, _, ok = kernels.refine_footpoints(
        curve.knots, curve.degree, curve.control_points, X,
        np.array([float(t0)]), curve.closed, ORTHO_TOL, MAX_REFINE_ITER,
    )
    return float(t[0]), bool(ok[0])


def frame_arrays(curve: BSplineCurve, ts, points):
    """Vectorized frame data at each (t_k, X_k).

    Returns (pts, T, N_out, rho, signed_d, degenerate) where degenerate marks
    parameters with a vanishing tangent.  rho is +inf on straight pieces.
    """
    X = np.asarray(points, dtype=np.float64)
    pts, d1, d2 = evaluate_jet_many(curve, ts, order=2)
    speed = np.linalg.norm(d1, axis=1)
    degenerate = speed < 1e-14
    safe = np.where(degenerate, 1.0, speed)
    T = d1 / safe[:, None]
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    left = np.stack([-T[:, 1], T[:, 0]], axis=1)
    straight = np.abs(cross) < 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(straight, np.inf, speed ** 3 / np.abs(cross))
    # normal away from the curvature center; arbitrary (left) on straight parts
    sign = np.where(straight, 1.0, -np.sign(cross))
    N_out = left * sign[:, None]
    signed_d = np.sum((X - pts) * N_out, axis=1)
    return pts, T, N_out, rho, signed_d, degenerate


def frame_at(curve: BSplineCurve, t: float, point) -> FootpointFrame:
    if curve.degree < 2:
        raise ValueError("frames require degree >= 2")
    X = np.asarray(point, dtype=np.float64).reshape(1, 2)
    pts, T, N_out, rho, signed_d, degenerate = frame_arrays(curve, np.array([float(t)]), X)
    if degenerate[0]:
        raise ValueError(f"degenerate tangent at t={t}")
    return FootpointFrame(
        t=float(t), point=pts[0], tangent=T[0], normal=N_out[0],
        curvature_radius=float(rho[0]), signed_d=float(signed_d[0]),
    )


def should_reinitialize(e_prev: float, e_curr: float, threshold: float = 0.2) -> bool:
    """Fitting-error variation test for reusing foot points across iterations."""
    if e_curr == 0.0:
        return False
    return abs(e_curr - e_prev) / e_curr > threshold
