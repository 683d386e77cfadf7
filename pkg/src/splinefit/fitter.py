"""Curve fitting by joint L-BFGS over control points and location parameters.

One fit: project data points onto the initial curve, minimize the joint
objective, then recompute foot points.  If that correction moves the fitting
error by more than restart_tol, the minimizer is restarted from the corrected
parameters with a fresh history (bounded by a restart cap).
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import footpoint, lbfgs, objective
from .geometry import BSplineCurve, make_uniform_curve


@dataclass
class FitTraceRecord:
    iteration: int
    elapsed: float
    error: float
    grad_inf_norm: float
    phase_timings: dict
    iter_seconds: float


@dataclass
class FitTrace:
    records: list = field(default_factory=list)
    restarts: int = 0
    footpoint_initializations: int = 0
    status: str = ""

    def errors(self):
        return np.array([r.error for r in self.records])

    def mean_iteration_seconds(self, max_records: int = None) -> float:
        recs = self.records if max_records is None else self.records[:max_records]
        if not recs:
            return 0.0
        return float(np.mean([r.iter_seconds for r in recs]))

    def phase_totals(self) -> dict:
        totals = {}
        for r in self.records:
            for k, v in r.phase_timings.items():
                totals[k] = totals.get(k, 0.0) + v
        return totals


@dataclass
class FitResult:
    curve: BSplineCurve
    params: np.ndarray
    trace: FitTrace


def default_initial_curve(problem: objective.FitProblem, n_ctrl: int = None) -> BSplineCurve:
    """Initial control polygon from the data's bounding geometry.

    Closed: points on a circle around the centroid with radius 0.6 x the
    bounding-box diagonal.  Open: points spread uniformly along the
    principal axis of the data.
    """
    n = problem.n_ctrl if n_ctrl is None else n_ctrl
    p = problem.degree
    if n < p + 1:
        raise ValueError("need at least degree+1 control points")
    X = problem.points
    centroid = X.mean(axis=0)
    if problem.closed:
        span = X.max(axis=0) - X.min(axis=0)
        radius = 0.6 * float(np.hypot(span[0], span[1]))
        if radius <= 0.0:
            radius = 0.5
        ang = 2.0 * np.pi * np.arange(n) / n
        ctrl = centroid + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    else:
        C = X - centroid
        _, _, vt = np.linalg.svd(C, full_matrices=False)
        axis = vt[0]
        proj = C @ axis
        lo, hi = float(proj.min()), float(proj.max())
        if hi <= lo:
            lo, hi = -0.5, 0.5
        ctrl = centroid + np.linspace(lo, hi, n)[:, None] * axis[None, :]
    return make_uniform_curve(n, p, problem.closed, ctrl)


def fit_lbfgs(
    problem: objective.FitProblem,
    initial_curve: BSplineCurve,
    config: lbfgs.LbfgsConfig = None,
    restart_tol: float = 1e-6,
    restart_cap: int = 5,
    samples_per_span: int = 32,
    initial_params=None,
) -> FitResult:
    cfg = config if config is not None else lbfgs.LbfgsConfig()
    if initial_curve.n_ctrl != problem.n_ctrl or initial_curve.degree != problem.degree \
            or initial_curve.closed != problem.closed:
        raise ValueError("initial curve topology does not match the problem")

    n = problem.n_ctrl
    N = problem.n_points
    trace = FitTrace()
    t0 = time.perf_counter()

    if initial_params is None:
        proj = footpoint.project_all(initial_curve, problem.points, samples_per_span)
        ts = proj.params
        trace.footpoint_initializations += 1
    else:
        ts = np.asarray(initial_params, dtype=np.float64).copy()

    last_data = [0.0]

    def fun(x):
        f, g, data = objective.value_and_gradient_raw(problem, x)
        last_data[0] = data
        return f, g

    ctrl = initial_curve.control_points.copy()
    it_offset = [0]

    def callback(rec, x):
        err = float(np.sqrt(2.0 * last_data[0] / N))
        trace.records.append(FitTraceRecord(
            iteration=it_offset[0] + rec.iteration,
            elapsed=time.perf_counter() - t0,
            error=err,
            grad_inf_norm=rec.grad_inf,
            phase_timings={"direction": rec.t_direction, "linesearch": rec.t_linesearch},
            iter_seconds=rec.t_iteration,
        ))

    status = "converged"
    while True:
        x0 = np.concatenate([ctrl.ravel(), ts])
        res = lbfgs.minimize(fun, x0, cfg, callback=callback)
        it_offset[0] += res.iterations
        ctrl = res.x[: 2 * n].reshape(n, 2)
        ts = res.x[2 * n:]
        status = res.status

        curve = problem.template_curve(ctrl)
        e_before = objective.fitting_error_raw(problem, ctrl, ts)
        proj = footpoint.project_all(curve, problem.points, samples_per_span)
        trace.footpoint_initializations += 1
        e_after = objective.fitting_error_raw(problem, ctrl, proj.params)
        if abs(e_before - e_after) > restart_tol:
            if trace.restarts >= restart_cap:
                status = "stuck_local_minimum"
                break
            trace.restarts += 1
            ts = proj.params.copy()
            continue
        break

    trace.status = status
    return FitResult(problem.template_curve(ctrl), ts, trace)
