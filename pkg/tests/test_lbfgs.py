import numpy as np
import pytest

from splinefit import lbfgs
from splinefit.lbfgs import (
    LbfgsConfig, LbfgsHistory, minimize, two_loop_direction, wolfe_line_search,
)


def dense_inverse_hessian(history: LbfgsHistory) -> np.ndarray:
    """Dense product form of the L-BFGS inverse Hessian estimate."""
    dim = history.dim
    H = history.gamma * np.eye(dim)
    S, Y, rho = history.ordered()
    for s, y, r in zip(S, Y, rho):
        V = np.eye(dim) - r * np.outer(y, s)
        H = V.T @ H @ V + r * np.outer(s, s)
    return H


def fill_history(rng, dim, m, n_pairs):
    hist = LbfgsHistory(m, dim)
    for _ in range(n_pairs):
        s = rng.standard_normal(dim)
        y = rng.standard_normal(dim)
        if np.dot(y, s) <= 0:
            y = -y
        assert hist.push(s, y)
    return hist


def test_two_loop_matches_dense_product():
    rng = np.random.default_rng(0)
    for _ in range(10):
        dim = int(rng.integers(5, 50))
        m = int(rng.choice([1, 5, 20]))
        hist = fill_history(rng, dim, m, int(rng.integers(1, 2 * m + 1)))
        g = rng.standard_normal(dim)
        expect = dense_inverse_hessian(hist) @ g
        got = two_loop_direction(hist, g)
        assert np.linalg.norm(got - expect) / np.linalg.norm(expect) < 1e-12


def test_empty_history_is_identity():
    hist = LbfgsHistory(5, 3)
    g = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(two_loop_direction(hist, g), g)
    assert np.array_equal(two_loop_direction(None, g), g)


def test_history_skips_nonpositive_curvature():
    hist = LbfgsHistory(5, 2)
    assert not hist.push(np.array([1.0, 0.0]), np.array([-1.0, 0.0]))
    assert hist.count == 0
    assert hist.push(np.array([1.0, 0.0]), np.array([2.0, 0.0]))
    assert hist.count == 1
    assert np.isclose(hist.gamma, 0.5)  # ys/yy = 2/4


def test_history_ring_buffer_drops_oldest():
    rng = np.random.default_rng(1)
    hist = fill_history(rng, 4, 3, 10)
    assert hist.count == 3
    S, Y, rho = hist.ordered()
    assert S.shape == (3, 4)
    # most recent pair determines gamma
    s, y = S[-1], Y[-1]
    assert np.isclose(hist.gamma, np.dot(y, s) / np.dot(y, y))


def quad(x):
    A = np.diag([1.0, 10.0, 100.0])
    return 0.5 * float(x @ A @ x), A @ x


def test_wolfe_conditions_hold_on_accepted_step():
    cfg = LbfgsConfig()
    x = np.array([1.0, 1.0, 1.0])
    f0, g0 = quad(x)
    p = -g0
    res = wolfe_line_search(quad, x, p, f0, g0, cfg)
    assert res.ok
    dg0 = float(np.dot(g0, p))
    assert res.f <= f0 + cfg.c1 * res.alpha * dg0
    assert float(np.dot(res.g, p)) >= cfg.c2 * dg0


def test_wolfe_rejects_ascent_direction():
    x = np.array([1.0, 0.0, 0.0])
    f0, g0 = quad(x)
    with pytest.raises(ValueError):
        wolfe_line_search(quad, x, g0, f0, g0, LbfgsConfig())


def test_minimize_rosenbrock():
    def rosen(x):
        a, b = 1.0, 100.0
        f = (a - x[0]) ** 2 + b * (x[1] - x[0] ** 2) ** 2
        g = np.array([
            -2 * (a - x[0]) - 4 * b * x[0] * (x[1] - x[0] ** 2),
            2 * b * (x[1] - x[0] ** 2),
        ])
        return f, g

    res = minimize(rosen, np.array([-1.2, 1.0]), LbfgsConfig(grad_tol=1e-10))
    assert res.status == "converged"
    assert np.allclose(res.x, [1.0, 1.0], atol=1e-7)
    # accepted iterates decrease f monotonically
    fs = [r.f for r in res.trace]
    assert all(b < a for a, b in zip(fs, fs[1:]))


def test_minimize_quadratic_exact_in_few_iterations():
    res = minimize(quad, np.array([1.0, 1.0, 1.0]), LbfgsConfig(grad_tol=1e-12))
    assert res.status == "converged"
    assert np.max(np.abs(res.x)) < 1e-10


def test_minimize_invalid_start():
    def bad(x):
        return np.nan, np.zeros_like(x)

    res = minimize(bad, np.zeros(2))
    assert res.status == "invalid"


def test_minimize_iteration_cap():
    def rosen_like(x):
        f = np.sum((x - 3.0) ** 4)
        return float(f), 4.0 * (x - 3.0) ** 3

    res = minimize(rosen_like, np.zeros(4), LbfgsConfig(max_iterations=2))
    assert res.status == "max_iterations"
    assert res.iterations == 2


def test_config_validation():
    with pytest.raises(ValueError):
        LbfgsConfig(c1=0.5, c2=0.1)
    with pytest.raises(ValueError):
        LbfgsConfig(m=0)
    with pytest.raises(ValueError):
        LbfgsConfig(grad_tol=0.0)


def test_iteration_records_have_timings():
    res = minimize(quad, np.array([1.0, 2.0, 3.0]), LbfgsConfig())
    for rec in res.trace:
        assert rec.t_iteration >= 0.0
        assert rec.t_direction >= 0.0 and rec.t_linesearch >= 0.0
        assert np.isfinite(rec.f) and np.isfinite(rec.grad_inf)
