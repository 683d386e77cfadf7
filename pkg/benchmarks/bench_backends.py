#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times each numeric kernel on representative problem sizes in-process (both
implementations are importable side by side), then optionally times a full
L-BFGS fit per backend in a subprocess, since the backend is chosen at
import time from SPLINEFIT_BACKEND.

Usage:
    python3 benchmarks/bench_backends.py [--repeats 7] [--skip-fit]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from splinefit import kernels
from splinefit.geometry import make_uniform_knots

FIT_SNIPPET = """
import time
from splinefit import fitter, kernels, lbfgs, objective, shapes
raw = shapes.generate_shape("noisy_circle", 1000, 0.0, 1)
pts, _ = objective.normalize_points(raw)
prob = objective.FitProblem(pts, 0.0, 1e-7, 3, 20, True)
curve0 = fitter.default_initial_curve(prob)
cfg = lbfgs.LbfgsConfig(max_iterations=200)
kernels.warmup()
fitter.fit_lbfgs(prob, curve0, cfg, restart_cap=0)  # warm run
t0 = time.perf_counter()
res = fitter.fit_lbfgs(prob, curve0, cfg, restart_cap=0)
dt = time.perf_counter() - t0
print(f"{kernels.BACKEND} fit: {dt:.4f} s, {len(res.trace.records)} iterations, "
      f"E = {res.trace.records[-1].error:.4e}", flush=True)
"""


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(rng):
    """(name, call factory per implementation) for each kernel."""
    n, p, N = 40, 3, 2000
    knots = make_uniform_knots(n, p, True)
    # smooth perturbed circle: representative of curves seen while fitting
    ang = 2.0 * np.pi * np.arange(n) / n
    radii = 0.35 + 0.05 * rng.standard_normal(n)
    ctrl = 0.5 + radii[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    ts = rng.uniform(0.0, 1.0, N)
    X = rng.uniform(0.0, 1.0, size=(N, 2))
    samples = rng.uniform(0.0, 1.0, size=(n * 32, 2))
    # realistic refinement seeds: nearest dense sample on the curve
    dense = np.linspace(0.0, 1.0, n * 32, endpoint=False)
    from splinefit.kernels import numpy_impl as _np_impl
    on_curve = _np_impl.curve_points(knots, p, ctrl, dense)
    seeds = dense[_np_impl.nearest_sample_index(on_curve, X)]
    dim, m = 2 * n + N, 20
    S = rng.standard_normal((m, dim))
    Y = S + 0.1 * rng.standard_normal((m, dim))
    rho = 1.0 / np.einsum("ij,ij->i", Y, S)
    g = rng.standard_normal(dim)
    return [
        ("eval_basis_many (N=2000)", lambda k: k.eval_basis_many(knots, p, ts)),
        ("curve_points (N=2000)", lambda k: k.curve_points(knots, p, ctrl, ts)),
        ("curve_jets (N=2000)", lambda k: k.curve_jets(knots, p, ctrl, ts)),
        ("objective_core (N=2000)", lambda k: k.objective_core(knots, p, ctrl, ts, X)),
        ("nearest_sample_index (2000x1280)",
         lambda k: k.nearest_sample_index(samples, X)),
        ("refine_footpoints (N=2000)",
         lambda k: k.refine_footpoints(knots, p, ctrl, X, seeds.copy(), True, 1e-10, 100)),
        ("two_loop (dim=2080, m=20)",
         lambda k: k.two_loop(g.copy(), S, Y, rho, 1.0)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=7,
                    help="timing repeats per kernel (best-of is reported)")
    ap.add_argument("--skip-fit", action="store_true",
                    help="skip the end-to-end fit comparison")
    args = ap.parse_args(argv)

    if kernels.BACKEND != "numba":
        print("numba backend unavailable (or disabled); nothing to compare",
              file=sys.stderr)
        return 1
    kernels.warmup()
    from splinefit import _kernels_numba as nb
    npk = kernels.numpy_impl

    rng = np.random.default_rng(0)
    print(f"{'kernel':<36} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, call in kernel_cases(rng):
        call(nb)  # ensure this signature is compiled before timing
        t_nb = _time(lambda: call(nb), args.repeats)
        t_np = _time(lambda: call(npk), args.repeats)
        print(f"{name:<36} {t_nb * 1e3:>8.3f}ms {t_np * 1e3:>8.3f}ms "
              f"{t_np / t_nb:>7.1f}x")

    if not args.skip_fit:
        print("\nend-to-end fit (noisy circle, 1000 points, 20 control points, "
              "200 iterations):", flush=True)
        for backend in ("numba", "numpy"):
            env = dict(os.environ, SPLINEFIT_BACKEND=backend)
            subprocess.run([sys.executable, "-c", FIT_SNIPPET], env=env, check=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
