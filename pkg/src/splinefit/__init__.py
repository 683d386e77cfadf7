"""Planar B-spline curve fitting by joint L-BFGS over control points and
location parameters, with the classic alternating solvers (PDM, TDM-LM, SDM)
for comparison."""

from .geometry import BSplineCurve, SpanEvaluation, evaluate, evaluate_jet, make_uniform_curve
from .objective import FitProblem, JointState, fitting_error, normalize_points, objective_value
from .lbfgs import LbfgsConfig, minimize
from .footpoint import FootpointFrame, frame_at, project_all, refine_footpoint
from .fitter import FitResult, FitTrace, default_initial_curve, fit_lbfgs
from .classic import AltConfig, QuadraticModel, run_alternating

__all__ = [
    "AltConfig",
    "BSplineCurve",
    "FitProblem",
    "FitResult",
    "FitTrace",
    "FootpointFrame",
    "JointState",
    "LbfgsConfig",
    "QuadraticModel",
    "SpanEvaluation",
    "default_initial_curve",
    "evaluate",
    "evaluate_jet",
    "fit_lbfgs",
    "fitting_error",
    "frame_at",
    "make_uniform_curve",
    "minimize",
    "normalize_points",
    "objective_value",
    "project_all",
    "refine_footpoint",
    "run_alternating",
]

__version__ = "0.1.0"
