"""Command-line harness.

Subcommands:
    generate       emit a point file for one of the built-in shapes
    fit            run one fitting method, write a trace CSV and a summary
    bench-scaling  per-iteration timing sweeps over data- or control-point counts
    render         SVG from a saved fit and point file

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 iteration cap
reached without convergence.
"""

import argparse
import csv
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import classic, fitter, kernels, lbfgs, objective, shapes, svg, textio

TRACE_HEADER = "# splinefit-trace-v1"

METHOD_CHOICES = ("lbfgs",) + classic.METHODS

_OK, _USAGE, _NUMERIC, _ITER_CAP = 0, 1, 2, 3

_STATUS_EXIT = {
    "converged": _OK,
    "stuck_local_minimum": _OK,
    "max_iterations": _ITER_CAP,
    "line_search_failed": _NUMERIC,
    "diverged": _NUMERIC,
    "solve_failed": _NUMERIC,
    "invalid": _NUMERIC,
}


@dataclass
class RunConfig:
    method: str = "lbfgs"
    n_ctrl: int = 8
    degree: int = 3
    closed: bool = True
    alpha: float = 0.0
    beta: float = 0.0
    m: int = 20
    grad_tol: float = 1e-8
    max_iter: int = 100_000
    restart_tol: float = 1e-6
    samples_per_span: int = 32
    shape: str = "circle"
    n_points: int = 100
    noise: float = 0.0
    seed: int = 0
    input: str = None
    trace_out: str = None
    svg_out: str = None
    fit_out: str = None
    initial_ctrl: str = None

    def __post_init__(self):
        if self.method not in METHOD_CHOICES:
            raise ValueError(f"method must be one of {METHOD_CHOICES}")


def _load_raw_points(cfg: RunConfig) -> np.ndarray:
    if cfg.input:
        return textio.read_points(cfg.input)
    return shapes.generate_shape(cfg.shape, cfg.n_points, cfg.noise, cfg.seed)


def _write_trace(path, trace: fitter.FitTrace):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(TRACE_HEADER + "\n")
        writer = csv.writer(fh)
        writer.writerow(["iter", "elapsed_s", "error", "grad_inf_norm"])
        for r in trace.records:
            writer.writerow([r.iteration, f"{r.elapsed:.6e}", f"{r.error:.17g}",
                             f"{r.grad_inf_norm:.17g}"])


def _print_summary(cfg: RunConfig, trace: fitter.FitTrace, total_s: float, out=None):
    out = out if out is not None else sys.stdout
    last = trace.records[-1] if trace.records else None
    n_iter = len(trace.records)
    mean_iter = trace.mean_iteration_seconds()
    final_e = last.error if last else float("nan")
    ginf = last.grad_inf_norm if last else float("nan")
    print(f"method={cfg.method} status={trace.status} iterations={n_iter} "
          f"final_error={final_e:.6e} grad_inf_norm={ginf:.3e}", file=out)
    print(f"total_time_s={total_s:.4f} mean_iter_time_s={mean_iter:.3e} "
          f"restarts={trace.restarts} footpoint_inits={trace.footpoint_initializations}",
          file=out)
    totals = trace.phase_totals()
    tsum = sum(totals.values())
    if tsum > 0:
        parts = " ".join(f"{k}={100.0 * v / tsum:.1f}%" for k, v in totals.items())
        print(f"phases: {parts}", file=out)


def run_single(cfg: RunConfig, problem: objective.FitProblem, curve0):
    """Run one method and return (curve, params, trace)."""
    if cfg.method == "lbfgs":
        lcfg = lbfgs.LbfgsConfig(m=cfg.m, grad_tol=cfg.grad_tol,
                                 max_iterations=cfg.max_iter)
        res = fitter.fit_lbfgs(problem, curve0, lcfg, restart_tol=cfg.restart_tol,
                               samples_per_span=cfg.samples_per_span)
        return res.curve, res.params, res.trace
    acfg = classic.AltConfig(grad_tol=cfg.grad_tol, max_iterations=cfg.max_iter,
                             samples_per_span=cfg.samples_per_span)
    res = classic.run_alternating(cfg.method, problem, curve0, acfg)
    return res.curve, res.params, res.trace


def run_and_trace(cfg: RunConfig) -> int:
    try:
        raw = _load_raw_points(cfg)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE
    try:
        scaled, tf = objective.normalize_points(raw)
        problem = objective.FitProblem(scaled, cfg.alpha, cfg.beta, cfg.degree,
                                       cfg.n_ctrl, cfg.closed)
        if cfg.initial_ctrl:
            from .geometry import make_uniform_curve

            ctrl0 = tf.apply(textio.read_points(cfg.initial_ctrl))
            curve0 = make_uniform_curve(cfg.n_ctrl, cfg.degree, cfg.closed, ctrl0)
        else:
            curve0 = fitter.default_initial_curve(problem)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE

    kernels.warmup()
    t0 = time.perf_counter()
    try:
        curve, params, trace = run_single(cfg, problem, curve0)
    except (FloatingPointError, classic.SolveFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if cfg.trace_out:
            _write_trace(cfg.trace_out, fitter.FitTrace(status="failed"))
        return _NUMERIC
    total_s = time.perf_counter() - t0

    if cfg.trace_out:
        _write_trace(cfg.trace_out, trace)
    _print_summary(cfg, trace, total_s)

    raw_curve = curve.with_control_points(tf.invert(curve.control_points))
    if cfg.fit_out:
        textio.write_curve(cfg.fit_out, raw_curve)
    if cfg.svg_out:
        svg.render_svg(cfg.svg_out, raw, raw_curve)
    return _STATUS_EXIT.get(trace.status, _NUMERIC)


def benchmark_scaling(axis: str, levels, base: RunConfig, out_path,
                      methods=METHOD_CHOICES, iters: int = 50) -> list:
    """Mean per-iteration wall time per method at each sweep level.

    data_points axis: regenerates the shape at each N (same seed).
    control_points axis: same data, refit with larger control polygons.
    Rows are dicts; also written as CSV when out_path is given.
    """
    if axis not in ("data_points", "control_points"):
        raise ValueError("axis must be 'data_points' or 'control_points'")
    if len(levels) < 1:
        raise ValueError("need at least one level")
    kernels.warmup()
    rows = []
    for level in levels:
        n_points = level if axis == "data_points" else base.n_points
        n_ctrl = level if axis == "control_points" else base.n_ctrl
        raw = shapes.generate_shape(base.shape, n_points, base.noise, base.seed)
        scaled, _ = objective.normalize_points(raw)
        problem = objective.FitProblem(scaled, base.alpha, base.beta, base.degree,
                                       n_ctrl, base.closed)
        curve0 = fitter.default_initial_curve(problem)
        for method in methods:
            try:
                trace = _bench_one(method, problem, curve0, base, iters)
                mean_s = trace.mean_iteration_seconds(iters)
            except (FloatingPointError, classic.SolveFailure) as exc:
                print(f"warning: {method} at level {level} failed: {exc}",
                      file=sys.stderr)
                mean_s = float("nan")
            rows.append({"method": method, "level": level, "n_points": n_points,
                         "n_ctrl": n_ctrl, "mean_iter_time_s": mean_s})
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    return rows


def _bench_one(method, problem, curve0, base: RunConfig, iters):
    # a tiny grad_tol forces the full iteration budget so means are comparable
    if method == "lbfgs":
        lcfg = lbfgs.LbfgsConfig(m=base.m, grad_tol=1e-300, max_iterations=iters)
        res = fitter.fit_lbfgs(problem, curve0, lcfg, restart_cap=0,
                               samples_per_span=base.samples_per_span)
        return res.trace
    acfg = classic.AltConfig(grad_tol=1e-300, max_iterations=iters,
                             samples_per_span=base.samples_per_span,
                             divergence_factor=float("inf"))
    res = classic.run_alternating(method, problem, curve0, acfg)
    return res.trace


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(_USAGE)


def _add_fit_args(p):
    p.add_argument("--method", choices=METHOD_CHOICES, default="lbfgs")
    p.add_argument("--n-ctrl", type=int, default=8)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--open", dest="closed", action="store_false",
                   help="fit an open (clamped) curve instead of a closed one")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--m", type=int, default=20, help="L-BFGS history size")
    p.add_argument("--grad-tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--restart-tol", type=float, default=1e-6)
    p.add_argument("--samples-per-span", type=int, default=32)
    p.add_argument("--shape", choices=shapes.KINDS[:-1], default="circle")
    p.add_argument("--n-points", type=int, default=100)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input", help="point file (overrides --shape)")


def main(argv=None) -> int:
    parser = _Parser(prog="splinefit",
                     description="Planar B-spline curve fitting by joint L-BFGS "
                                 "with PDM/TDM-LM/SDM baselines.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a point file")
    g.add_argument("--kind", choices=shapes.KINDS[:-1], default="circle")
    g.add_argument("--n-points", type=int, default=100)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="fit one curve and write traces")
    _add_fit_args(f)
    f.add_argument("--trace", dest="trace_out", help="per-iteration CSV path")
    f.add_argument("--svg", dest="svg_out", help="render data + fitted curve")
    f.add_argument("--save-fit", dest="fit_out", help="save the fitted curve")
    f.add_argument("--initial-ctrl",
                   help="point file with explicit initial control points")

    b = sub.add_parser("bench-scaling", help="per-iteration time sweeps")
    _add_fit_args(b)
    b.add_argument("--axis", choices=("data_points", "control_points"),
                   required=True)
    b.add_argument("--levels", required=True,
                   help="comma-separated sweep levels, e.g. 100,200,500")
    b.add_argument("--iters", type=int, default=50)
    b.add_argument("--out", required=True)

    r = sub.add_parser("render", help="SVG from a saved fit")
    r.add_argument("--curve", required=True)
    r.add_argument("--points")
    r.add_argument("--out", required=True)

    args = parser.parse_args(argv)

    if args.command == "generate":
        try:
            pts = shapes.generate_shape(args.kind, args.n_points, args.noise,
                                        args.seed)
            textio.write_points(args.out, pts)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return _USAGE
        return _OK

    if args.command == "fit":
        cfg = RunConfig(
            method=args.method, n_ctrl=args.n_ctrl, degree=args.degree,
            closed=args.closed, alpha=args.alpha, beta=args.beta, m=args.m,
            grad_tol=args.grad_tol, max_iter=args.max_iter,
            restart_tol=args.restart_tol, samples_per_span=args.samples_per_span,
            shape=args.shape, n_points=args.n_points, noise=args.noise,
            seed=args.seed, input=args.input, trace_out=args.trace_out,
            svg_out=args.svg_out, fit_out=args.fit_out,
            initial_ctrl=args.initial_ctrl,
        )
        return run_and_trace(cfg)

    if args.command == "bench-scaling":
        cfg = RunConfig(
            method=args.method, n_ctrl=args.n_ctrl, degree=args.degree,
            closed=args.closed, alpha=args.alpha, beta=args.beta, m=args.m,
            shape=args.shape, n_points=args.n_points, noise=args.noise,
            seed=args.seed, samples_per_span=args.samples_per_span,
        )
        try:
            levels = [int(v) for v in args.levels.split(",") if v.strip()]
            benchmark_scaling(args.axis, levels, cfg, args.out, iters=args.iters)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return _USAGE
        return _OK

    if args.command == "render":
        try:
            curve = textio.read_curve(args.curve)
            pts = textio.read_points(args.points) if args.points else \
                np.zeros((0, 2))
            svg.render_svg(args.out, pts, curve)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return _USAGE
        return _OK

    return _USAGE


if __name__ == "__main__":
    sys.exit(main())
