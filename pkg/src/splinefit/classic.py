"""Traditional alternating curve-fitting methods: PDM, TDM-LM and SDM.

Each iteration projects the data points onto the current curve (reusing the
previous parameters as seeds unless the fitting error moved enough to force
a dense re-initialization), assembles a quadratic model of the error in the
control points, and solves the resulting normal equations.

Quadratic models minimize  0.5 * sum_k e_k  +  fairing  so all three methods
target the same total objective as the joint fitter.  Control-point
coordinates are interleaved [x1, y1, x2, y2, ...], which keeps the system
banded for open curves (cyclic-banded for closed ones).
"""

import logging
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import footpoint, objective
from .fitter import FitTrace, FitTraceRecord
from .geometry import BSplineCurve

log = logging.getLogger(__name__)

METHODS = ("pdm", "tdmlm", "sdm")

# above this dimension banded/sparse factorizations take over from dense
_DENSE_DIM = 96


@dataclass
class QuadraticModel:
    """Q(P) = 0.5 P^T A P - b^T P + c over the flattened control points."""

    A: np.ndarray
    b: np.ndarray
    c: float

    def value(self, ctrl) -> float:
        p = np.asarray(ctrl, dtype=np.float64).ravel()
        return 0.5 * float(p @ self.A @ p) - float(self.b @ p) + self.c


def _basis_rows(problem: objective.FitProblem, ts):
    from . import kernels

    tw = ts % 1.0 if problem.closed else np.clip(ts, 0.0, 1.0)
    spans, B, _, _ = kernels.eval_basis_many(problem.knots, problem.degree, tw)
    p = problem.degree
    idx = (spans[:, None] - p + np.arange(p + 1)[None, :]) % problem.n_ctrl
    return B, idx


def _fairing_matrix(problem: objective.FitProblem):
    n = problem.n_ctrl
    A = np.zeros((2 * n, 2 * n))
    if problem.alpha == 0.0 and problem.beta == 0.0:
        return A
    g = problem.grams
    M = 2.0 * (problem.alpha * g.gram_d1 + problem.beta * g.gram_d2)
    A[0::2, 0::2] = M
    A[1::2, 1::2] = M
    return A


def assemble_pdm(problem: objective.FitProblem, curve: BSplineCurve, ts) -> QuadraticModel:
    """Normal equations of the plain point-distance error at fixed parameters."""
    n = problem.n_ctrl
    X = problem.points
    B, idx = _basis_rows(problem, np.asarray(ts, dtype=np.float64))
    A = _fairing_matrix(problem)
    b = np.zeros(2 * n)
    W = np.einsum("ka,kb->kab", B, B)
    np.add.at(A, (2 * idx[:, :, None], 2 * idx[:, None, :]), W)
    np.add.at(A, (2 * idx[:, :, None] + 1, 2 * idx[:, None, :] + 1), W)
    np.add.at(b, 2 * idx, B * X[:, 0:1])
    np.add.at(b, 2 * idx + 1, B * X[:, 1:2])
    c = 0.5 * float(np.sum(X * X))
    return QuadraticModel(A, b, c)


def _directional_rows(B, idx, D):
    """Rows v with v . P_flat = P(t_k) . D_k, for unit directions D (N, 2)."""
    N, w = B.shape
    V = np.empty((N, 2 * w))
    cols = np.empty((N, 2 * w), dtype=np.int64)
    V[:, 0::2] = B * D[:, 0:1]
    V[:, 1::2] = B * D[:, 1:2]
    cols[:, 0::2] = 2 * idx
    cols[:, 1::2] = 2 * idx + 1
    return V, cols


def _add_projector_terms(A, b, c, V, cols, rhs, coeff=None):
    """Accumulate 0.5 * coeff_k * (v_k . P - rhs_k)^2 into the model."""
    w = coeff if coeff is not None else np.ones(V.shape[0])
    O = np.einsum("k,ka,kb->kab", w, V, V)
    np.add.at(A, (cols[:, :, None], cols[:, None, :]), O)
    np.add.at(b, cols, (w * rhs)[:, None] * V)
    return c + 0.5 * float(np.sum(w * rhs * rhs))


def assemble_tdm(problem: objective.FitProblem, curve: BSplineCurve, ts,
                 frames=None) -> QuadraticModel:
    """Tangent-distance error: squared residual along the curve normal."""
    ts = np.asarray(ts, dtype=np.float64)
    if frames is None:
        frames = footpoint.frame_arrays(curve, ts, problem.points)
    _, _, N_out, _, _, degenerate = frames
    X = problem.points
    B, idx = _basis_rows(problem, ts)
    A = _fairing_matrix(problem)
    b = np.zeros(2 * problem.n_ctrl)
    c = 0.0

    good = ~degenerate
    if np.any(good):
        V, cols = _directional_rows(B[good], idx[good], N_out[good])
        rhs = np.sum(X[good] * N_out[good], axis=1)
        c = _add_projector_terms(A, b, c, V, cols, rhs)
    if np.any(degenerate):
        # vanishing tangent leaves the normal undefined; keep the PD term
        log.warning("TDM: %d degenerate tangents fell back to the PD term",
                    int(np.sum(degenerate)))
        sub = degenerate
        W = np.einsum("ka,kb->kab", B[sub], B[sub])
        np.add.at(A, (2 * idx[sub][:, :, None], 2 * idx[sub][:, None, :]), W)
        np.add.at(A, (2 * idx[sub][:, :, None] + 1, 2 * idx[sub][:, None, :] + 1), W)
        np.add.at(b, 2 * idx[sub], B[sub] * X[sub][:, 0:1])
        np.add.at(b, 2 * idx[sub] + 1, B[sub] * X[sub][:, 1:2])
        c += 0.5 * float(np.sum(X[sub] * X[sub]))
    return QuadraticModel(A, b, c)


def sdm_tangential_coefficients(rho, signed_d):
    """Eq-split weights on the tangential term of the SD error.

    d is the residual distance measured toward the curvature center
    (d = -signed_d).  Convex side (d < 0): d/(d - rho).  Between curve and
    center (0 <= d < rho): 0.  Beyond the center (d >= rho): clamped to 1.
    Straight pieces (rho = inf): 0, i.e. the TDM term.
    """
    d = -np.asarray(signed_d, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    coeff = np.zeros_like(d)
    neg = d < 0.0
    finite = np.isfinite(rho)
    m = neg & finite
    coeff[m] = d[m] / (d[m] - rho[m])
    beyond = finite & (d >= rho)
    if np.any(beyond):
        log.warning("SDM: %d points beyond the curvature center; tangential "
                    "weight clamped to 1", int(np.sum(beyond)))
        coeff[beyond] = 1.0
    return coeff


def assemble_sdm(problem: objective.FitProblem, curve: BSplineCurve, ts,
                 frames=None) -> QuadraticModel:
    """Curvature-aware squared-distance error (normal term + weighted tangential)."""
    ts = np.asarray(ts, dtype=np.float64)
    if frames is None:
        frames = footpoint.frame_arrays(curve, ts, problem.points)
    _, T, N_out, rho, signed_d, degenerate = frames
    model = assemble_tdm(problem, curve, ts, frames=frames)
    X = problem.points
    B, idx = _basis_rows(problem, ts)
    coeff = sdm_tangential_coefficients(rho, signed_d)
    coeff[degenerate] = 0.0
    active = coeff > 0.0
    if np.any(active):
        V, cols = _directional_rows(B[active], idx[active], T[active])
        rhs = np.sum(X[active] * T[active], axis=1)
        model.c = _add_projector_terms(model.A, model.b, model.c, V, cols, rhs,
                                       coeff=coeff[active])
    return model


class SolveFailure(RuntimeError):
    pass


def _solve_spd(A, b, closed: bool, bandwidth: int):
    dim = A.shape[0]
    try:
        if dim <= _DENSE_DIM:
            cf = scipy.linalg.cho_factor(A, check_finite=False)
            return scipy.linalg.cho_solve(cf, b, check_finite=False)
        if not closed:
            ab = np.zeros((bandwidth + 1, dim))
            for k in range(bandwidth + 1):
                ab[bandwidth - k, k:] = np.diagonal(A, offset=k)
            return scipy.linalg.solveh_banded(ab, b, check_finite=False)
        lu = scipy.sparse.linalg.splu(scipy.sparse.csc_matrix(A))
        return lu.solve(b)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, RuntimeError) as exc:
        raise SolveFailure(f"control-point system factorization failed: {exc}") from exc


def solve_quadratic_step(model: QuadraticModel, problem: objective.FitProblem):
    """PDM/SDM control-point update; tiny trace shift guards rank deficiency."""
    dim = model.A.shape[0]
    shift = 1e-12 * float(np.trace(model.A)) / dim
    A = model.A + shift * np.eye(dim)
    x = _solve_spd(A, model.b, problem.closed, 2 * problem.degree + 1)
    return x.reshape(problem.n_ctrl, 2)


def tdmlm_mu(A: np.ndarray, n_ctrl: int) -> float:
    return float(np.trace(A)) / (80.0 * n_ctrl)


def solve_tdmlm_step(model: QuadraticModel, current_ctrl: np.ndarray,
                     closed: bool = True, bandwidth: int = 7):
    """Levenberg-Marquardt damped solve of the TDM normal equations.

    Solves (A + mu*I) P_new = b + mu * P_cur, i.e. the damped step
    (A + mu*I) dP = b - A P_cur, so the fixed point satisfies A P = b and
    the damping only shortens the step instead of biasing the solution.
    """
    ctrl = np.asarray(current_ctrl, dtype=np.float64)
    n_ctrl = ctrl.shape[0]
    dim = model.A.shape[0]
    mu = tdmlm_mu(model.A, n_ctrl)
    A = model.A + mu * np.eye(dim)
    x = _solve_spd(A, model.b + mu * ctrl.ravel(), closed, bandwidth)
    return x.reshape(n_ctrl, 2)


@dataclass
class AltConfig:
    grad_tol: float = 1e-8
    max_iterations: int = 2000
    samples_per_span: int = 32
    reinit_threshold: float = 0.2
    divergence_factor: float = 10.0


@dataclass
class AltResult:
    curve: BSplineCurve
    params: np.ndarray
    trace: FitTrace


def run_alternating(method: str, problem: objective.FitProblem,
                    initial_curve: BSplineCurve, config: AltConfig = None) -> AltResult:
    """Foot-point projection / control-point update loop with phase timings."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    cfg = config if config is not None else AltConfig()
    curve = initial_curve
    X = problem.points
    trace = FitTrace()
    t_start = time.perf_counter()
    ts = None
    e_hist = []
    status = "max_iterations"

    for it in range(cfg.max_iterations):
        t_iter0 = time.perf_counter()
        # Step 1: foot-point projection
        if ts is None:
            proj = footpoint.project_all(curve, X, cfg.samples_per_span)
            trace.footpoint_initializations += 1
        elif len(e_hist) >= 2 and footpoint.should_reinitialize(
                e_hist[-2], e_hist[-1], cfg.reinit_threshold):
            proj = footpoint.project_all(curve, X, cfg.samples_per_span)
            trace.footpoint_initializations += 1
        else:
            proj = footpoint.refine_all(curve, X, ts)
        ts = proj.params
        t_fp = time.perf_counter() - t_iter0

        # Step 2: quadratic model in the control points
        t0 = time.perf_counter()
        if method == "pdm":
            model = assemble_pdm(problem, curve, ts)
        elif method == "tdmlm":
            model = assemble_tdm(problem, curve, ts)
        else:
            model = assemble_sdm(problem, curve, ts)
        t_fill = time.perf_counter() - t0

        t0 = time.perf_counter()
        if method == "tdmlm":
            new_ctrl = solve_tdmlm_step(model, curve.control_points,
                                        problem.closed, 2 * problem.degree + 1)
        else:
            new_ctrl = solve_quadratic_step(model, problem)
        curve = curve.with_control_points(new_ctrl)
        t_solve = time.perf_counter() - t0
        iter_seconds = time.perf_counter() - t_iter0

        # instrumentation (outside the phase clocks)
        err = objective.fitting_error_raw(problem, new_ctrl, ts)
        x = np.concatenate([new_ctrl.ravel(), ts])
        _, grad, _ = objective.value_and_gradient_raw(problem, x)
        ginf = float(np.max(np.abs(grad)))
        e_hist.append(err)
        trace.records.append(FitTraceRecord(
            iteration=it,
            elapsed=time.perf_counter() - t_start,
            error=err,
            grad_inf_norm=ginf,
            phase_timings={"footpoint": t_fp, "fill": t_fill, "solve": t_solve},
            iter_seconds=iter_seconds,
        ))
        if ginf < cfg.grad_tol:
            status = "converged"
            break
        if err > cfg.divergence_factor * e_hist[0] + 1e-300:
            status = "diverged"
            break

    trace.status = status
    return AltResult(curve, ts, trace)
