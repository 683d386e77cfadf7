"""Joint fitting objective and its analytic gradient.

f(P, T) = 0.5 * sum_k ||P(t_k) - X_k||^2
          + alpha * P^T G1 P + beta * P^T G2 P

where G1, G2 are the Gram matrices of the first/second derivative basis
functions.  Both control-point coordinates and location parameters are free
variables, packed into one flat vector [P1.x, P1.y, ..., Pn.x, Pn.y,
t_1, ..., t_N].
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .geometry import BSplineCurve, make_uniform_knots


@dataclass(frozen=True)
class NormalizeTransform:
    """Uniform scale + translation mapping raw coordinates into the unit box."""

    scale: float
    offset: np.ndarray  # applied after scaling

    def apply(self, pts):
        return np.asarray(pts, dtype=np.float64) * self.scale + self.offset

    def invert(self, pts):
        return (np.asarray(pts, dtype=np.float64) - self.offset) / self.scale


def normalize_points(raw):
    """Scale points into [0,1]^2 preserving aspect ratio.

    The longer bounding-box side maps to [0,1]; the shorter axis is centered.
    """
    pts = np.asarray(raw, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise ValueError("expected an (N, 2) point array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    side = float(np.max(hi - lo))
    if side <= 0.0:
        raise ValueError("all points coincide; unit-box scale undefined")
    scale = 1.0 / side
    offset = (1.0 - (hi - lo) * scale) / 2.0 - lo * scale
    tf = NormalizeTransform(scale, offset)
    return tf.apply(pts), tf


@dataclass(frozen=True)
class FairingGrams:
    gram_d1: np.ndarray  # n x n, integral of N'_i N'_j
    gram_d2: np.ndarray  # n x n, integral of N''_i N''_j


def build_fairing_grams(degree: int, n_ctrl: int, closed: bool) -> FairingGrams:
    """Exact derivative Gram matrices via per-span Gauss-Legendre quadrature.

    degree+1 nodes per span are exact for the piecewise-polynomial
    integrands; closed topologies accumulate with wrapped (cyclic) indices.
    """
    p = degree
    knots = make_uniform_knots(n_ctrl, p, closed)
    n_basis = knots.shape[0] - p - 1
    nodes, weights = np.polynomial.legendre.leggauss(p + 1)
    ts = []
    ws = []
    for j in range(p, n_basis):
        a, b = knots[j], knots[j + 1]
        if b <= a:
            continue
        ts.append((a + b) / 2.0 + (b - a) / 2.0 * nodes)
        ws.append((b - a) / 2.0 * weights)
    ts = np.concatenate(ts)
    ws = np.concatenate(ws)
    spans, _, B1, B2 = kernels.eval_basis_many(knots, p, ts)
    idx = (spans[:, None] - p + np.arange(p + 1)[None, :]) % n_ctrl
    g1 = np.zeros((n_ctrl, n_ctrl))
    g2 = np.zeros((n_ctrl, n_ctrl))
    o1 = np.einsum("k,ka,kb->kab", ws, B1, B1)
    o2 = np.einsum("k,ka,kb->kab", ws, B2, B2)
    np.add.at(g1, (idx[:, :, None], idx[:, None, :]), o1)
    np.add.at(g2, (idx[:, :, None], idx[:, None, :]), o2)
    return FairingGrams(g1, g2)


@dataclass
class FitProblem:
    """Data points plus fairing weights and the fixed curve topology."""

    points: np.ndarray
    alpha: float = 0.0
    beta: float = 0.0
    degree: int = 3
    n_ctrl: int = 8
    closed: bool = True
    knots: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 2 or self.points.shape[0] < 1:
            raise ValueError("expected an (N, 2) point array")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("data points must be finite")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("fairing weights must be nonnegative")
        if self.n_ctrl < self.degree + 1:
            raise ValueError("need at least degree+1 control points")
        if self.beta > 0 and self.degree < 2:
            raise ValueError("beta > 0 requires degree >= 2")
        self.knots = make_uniform_knots(self.n_ctrl, self.degree, self.closed)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def n_vars(self) -> int:
        return 2 * self.n_ctrl + self.n_points

    @cached_property
    def grams(self) -> FairingGrams:
        return build_fairing_grams(self.degree, self.n_ctrl, self.closed)

    def template_curve(self, ctrl) -> BSplineCurve:
        return BSplineCurve(self.degree, self.knots, np.asarray(ctrl, dtype=np.float64), self.closed)


@dataclass
class JointState:
    """Flat variable vector: control-point coordinates then location parameters."""

    vector: np.ndarray
    n_ctrl: int

    @classmethod
    def from_parts(cls, ctrl, ts) -> "JointState":
        ctrl = np.asarray(ctrl, dtype=np.float64)
        ts = np.asarray(ts, dtype=np.float64)
        return cls(np.concatenate([ctrl.ravel(), ts]), ctrl.shape[0])

    @property
    def control_points(self) -> np.ndarray:
        return self.vector[: 2 * self.n_ctrl].reshape(self.n_ctrl, 2)

    @property
    def params(self) -> np.ndarray:
        return self.vector[2 * self.n_ctrl:]


def _wrap_params(problem: FitProblem, ts):
    if problem.closed:
        return ts % 1.0
    return np.clip(ts, 0.0, 1.0)


def _fairing_value_and_grad(problem: FitProblem, ctrl):
    if problem.alpha == 0.0 and problem.beta == 0.0:
        return 0.0, None
    g = problem.grams
    M = problem.alpha * g.gram_d1 + problem.beta * g.gram_d2
    MP = M @ ctrl
    val = float(np.sum(ctrl * MP))
    return val, 2.0 * MP


def value_and_gradient_raw(problem: FitProblem, x: np.ndarray):
    """Objective value, full gradient and the bare data term, from a flat vector."""
    n = problem.n_ctrl
    ctrl = x[: 2 * n].reshape(n, 2)
    ts = x[2 * n:]
    tw = _wrap_params(problem, ts)
    fdata, gcp, gt = kernels.objective_core(
        problem.knots, problem.degree, ctrl, tw, problem.points
    )
    fval, fgrad = _fairing_value_and_grad(problem, ctrl)
    f = fdata + fval
    if fgrad is not None:
        gcp = gcp + fgrad
    if not problem.closed:
        # clamped parameters sit on a flat piece of the objective
        outside = (ts < 0.0) | (ts > 1.0)
        if np.any(outside):
            gt = gt.copy()
            gt[outside] = 0.0
    grad = np.concatenate([np.asarray(gcp).ravel(), gt])
    if not np.isfinite(f) or not np.all(np.isfinite(grad)):
        raise FloatingPointError("objective evaluation produced non-finite values")
    return f, grad, fdata


def objective_value(problem: FitProblem, state: JointState) -> float:
    f, _, _ = value_and_gradient_raw(problem, state.vector)
    return f


def objective_gradient(problem: FitProblem, state: JointState) -> np.ndarray:
    _, g, _ = value_and_gradient_raw(problem, state.vector)
    return g


def fitting_error_raw(problem: FitProblem, ctrl, ts) -> float:
    """Root-mean-square point-to-curve residual (fairing term excluded)."""
    tw = _wrap_params(problem, np.asarray(ts, dtype=np.float64))
    pts = kernels.curve_points(problem.knots, problem.degree, np.asarray(ctrl, dtype=np.float64), tw)
    r = pts - problem.points
    return float(np.sqrt(np.mean(np.sum(r * r, axis=1))))


def fitting_error(problem: FitProblem, state: JointState) -> float:
    return fitting_error_raw(problem, state.control_points, state.params)
