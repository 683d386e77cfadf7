"""B-spline curves on fixed uniform knots.

Open curves use a clamped uniform knot vector on [0,1].  Closed curves are
periodic: the knot vector is the uniform extension (j - p)/n and evaluation
takes control-point indices modulo n, so P(0) = P(1) holds structurally and
the optimization keeps exactly n control points.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class SpanEvaluation:
    """Cached Cox-de Boor output for one parameter value."""

    span_index: int
    basis: np.ndarray
    basis_d1: np.ndarray
    basis_d2: np.ndarray


@dataclass(frozen=True)
class BSplineCurve:
    degree: int
    knots: np.ndarray
    control_points: np.ndarray  # (n, 2)
    closed: bool

    @property
    def n_ctrl(self) -> int:
        return self.control_points.shape[0]

    @property
    def n_spans(self) -> int:
        if self.closed:
            return self.n_ctrl
        return self.n_ctrl - self.degree

    def with_control_points(self, ctrl) -> "BSplineCurve":
        ctrl = np.asarray(ctrl, dtype=np.float64)
        if ctrl.shape != self.control_points.shape:
            raise ValueError("control point array shape mismatch")
        return BSplineCurve(self.degree, self.knots, ctrl, self.closed)

    def wrap(self, ts):
        """Map parameters into the domain: mod 1 (closed) or clip (open)."""
        ts = np.asarray(ts, dtype=np.float64)
        if self.closed:
            return ts % 1.0
        return np.clip(ts, 0.0, 1.0)


def make_uniform_knots(n: int, p: int, closed: bool) -> np.ndarray:
    if closed:
        return (np.arange(n + 2 * p + 1, dtype=np.float64) - p) / n
    interior = np.linspace(0.0, 1.0, n - p + 1)
    return np.concatenate([np.zeros(p), interior, np.ones(p)])


def make_uniform_curve(n: int, p: int, closed: bool, init_points) -> BSplineCurve:
    """Curve with uniform knots on [0,1] and the given control points."""
    if p < 1:
        raise ValueError(f"degree must be >= 1, got {p}")
    if n < p + 1:
        raise ValueError(f"need at least degree+1={p + 1} control points, got {n}")
    ctrl = np.asarray(init_points, dtype=np.float64)
    if ctrl.shape != (n, 2):
        raise ValueError(f"expected {n} 2-D control points, got shape {ctrl.shape}")
    if not np.all(np.isfinite(ctrl)):
        raise ValueError("control points must be finite")
    return BSplineCurve(p, make_uniform_knots(n, p, closed), ctrl, closed)


def evaluate_many(curve: BSplineCurve, ts) -> np.ndarray:
    ts = np.asarray(ts, dtype=np.float64)
    if not np.all(np.isfinite(ts)):
        raise ValueError("parameters must be finite")
    tw = curve.wrap(ts)
    return kernels.curve_points(curve.knots, curve.degree, curve.control_points, tw)


def evaluate(curve: BSplineCurve, t: float) -> np.ndarray:
    return evaluate_many(curve, np.array([float(t)]))[0]


def evaluate_jet_many(curve: BSplineCurve, ts, order: int = 2):
    """(points, first derivatives, second derivatives) at each parameter."""
    if order == 2 and curve.degree < 2:
        raise ValueError("second derivative requires degree >= 2")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    ts = np.asarray(ts, dtype=np.float64)
    if not np.all(np.isfinite(ts)):
        raise ValueError("parameters must be finite")
    tw = curve.wrap(ts)
    return kernels.curve_jets(curve.knots, curve.degree, curve.control_points, tw)


def evaluate_jet(curve: BSplineCurve, t: float, order: int = 2):
    pts, d1, d2 = evaluate_jet_many(curve, np.array([float(t)]), order=order)
    return pts[0], d1[0], d2[0]


def span_evaluation(curve: BSplineCurve, t: float) -> SpanEvaluation:
    tw = curve.wrap(np.array([float(t)]))
    spans, B, B1, B2 = kernels.eval_basis_many(curve.knots, curve.degree, tw)
    return SpanEvaluation(int(spans[0]), B[0], B1[0], B2[0])


def active_control_indices(curve: BSplineCurve, span: int) -> np.ndarray:
    return (span - curve.degree + np.arange(curve.degree + 1)) % curve.n_ctrl
