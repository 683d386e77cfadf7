import numpy as np
import pytest

from splinefit import classic, fitter, kernels, lbfgs, objective, shapes
from splinefit.cli import RunConfig, _bench_one


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    kernels.warmup()


def make_problem(kind="circle", n_points=100, n_ctrl=6, degree=3, closed=True,
                 alpha=0.0, beta=0.0, noise=0.0, seed=0):
    raw = shapes.generate_shape(kind, n_points, noise, seed)
    scaled, _ = objective.normalize_points(raw)
    return objective.FitProblem(scaled, alpha, beta, degree, n_ctrl, closed)


@pytest.fixture(scope="session")
def circle_problem():
    return make_problem("circle", 100, 6)


@pytest.fixture(scope="session")
def circle_bench(circle_problem):
    """Shared circle-instance results: converged fits plus per-iteration timing."""
    prob = circle_problem
    curve0 = fitter.default_initial_curve(prob)
    out = {"problem": prob, "curve0": curve0}
    out["lbfgs"] = fitter.fit_lbfgs(prob, curve0)
    for m in classic.METHODS:
        out[m] = classic.run_alternating(m, prob, curve0)
    base = RunConfig()
    out["mean_iter"] = {
        m: _bench_one(m, prob, curve0, base, 50).mean_iteration_seconds(50)
        for m in ("lbfgs",) + classic.METHODS
    }
    return out


def random_curve(rng, degree=None, n_ctrl=None, closed=None):
    from splinefit.geometry import make_uniform_curve

    p = int(rng.integers(2, 4)) if degree is None else degree
    n = int(rng.integers(p + 2, 11)) if n_ctrl is None else n_ctrl
    c = bool(rng.integers(0, 2)) if closed is None else closed
    ctrl = rng.uniform(0.0, 1.0, size=(n, 2))
    return make_uniform_curve(n, p, c, ctrl)


def fd_gradient(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy(); xp[i] += h
        xm = x.copy(); xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g
