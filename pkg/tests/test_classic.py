import numpy as np
import pytest

from splinefit import classic, footpoint, objective
from splinefit.classic import (
    AltConfig, METHODS, assemble_pdm, assemble_sdm, assemble_tdm,
    run_alternating, sdm_tangential_coefficients, solve_quadratic_step,
    solve_tdmlm_step, tdmlm_mu,
)
from splinefit.fitter import default_initial_curve
from splinefit.geometry import evaluate_many, make_uniform_curve

from conftest import make_problem


def projected_params(problem, curve):
    return footpoint.project_all(curve, problem.points, 32).params


def direct_error_sum(method, problem, curve, ts):
    """Per-point error terms summed directly, for model-fidelity checks."""
    frames = footpoint.frame_arrays(curve, ts, problem.points)
    pts, T, N_out, rho, signed_d, degenerate = frames
    r = pts - problem.points
    if method == "pdm":
        e = np.sum(r * r, axis=1)
    else:
        en = np.sum(r * N_out, axis=1) ** 2
        et = np.sum(r * T, axis=1) ** 2
        if method == "tdmlm":
            e = np.where(degenerate, np.sum(r * r, axis=1), en)
        else:
            coeff = sdm_tangential_coefficients(rho, signed_d)
            coeff[degenerate] = 0.0
            e = np.where(degenerate, np.sum(r * r, axis=1), en + coeff * et)
    g = problem.grams
    M = problem.alpha * g.gram_d1 + problem.beta * g.gram_d2
    fair = float(np.sum(curve.control_points * (M @ curve.control_points)))
    return 0.5 * float(np.sum(e)) + fair


@pytest.mark.parametrize("method", METHODS)
def test_quadratic_model_fidelity(method):
    prob = make_problem("noisy_circle", 40, 7, alpha=1e-3, beta=1e-4, seed=2)
    curve = default_initial_curve(prob)
    ts = projected_params(prob, curve)
    if method == "pdm":
        model = assemble_pdm(prob, curve, ts)
    elif method == "tdmlm":
        model = assemble_tdm(prob, curve, ts)
    else:
        model = assemble_sdm(prob, curve, ts)
    direct = direct_error_sum(method, prob, curve, ts)
    assert abs(model.value(curve.control_points) - direct) < 1e-12 * max(1.0, abs(direct))


def test_pdm_hand_assembled_single_point():
    # one data point at t=0.5 on a degree-1 two-control-point curve
    curve = make_uniform_curve(2, 1, False, np.array([[0.0, 0.0], [1.0, 0.0]]))
    X = np.array([[0.3, 0.7]])
    prob = objective.FitProblem(X, 0.0, 0.0, 1, 2, False)
    model = assemble_pdm(prob, curve, np.array([0.5]))
    # residual 0.5*(P1+P2) - X: A = 0.25 * [[1,1],[1,1]] per coordinate
    expect_A = np.zeros((4, 4))
    for i in (0, 2):
        for j in (0, 2):
            expect_A[i, j] = expect_A[i + 1, j + 1] = 0.25
    assert np.allclose(model.A, expect_A, atol=1e-14)
    assert np.allclose(model.b, 0.5 * np.array([0.3, 0.7, 0.3, 0.7]), atol=1e-14)
    # minimizer passes through X at t=0.5
    new_ctrl = solve_quadratic_step(model, prob)
    mid = evaluate_many(curve.with_control_points(new_ctrl), np.array([0.5]))[0]
    assert np.allclose(mid, X[0], atol=1e-6)


def test_pdm_matches_stacked_least_squares():
    prob = make_problem("noisy_circle", 30, 6, seed=4)
    curve = default_initial_curve(prob)
    ts = projected_params(prob, curve)
    model = assemble_pdm(prob, curve, ts)
    sol = solve_quadratic_step(model, prob).ravel()
    # stacked system: rows of basis values against each coordinate
    from splinefit import kernels

    spans, B, _, _ = kernels.eval_basis_many(prob.knots, prob.degree, ts)
    N, w = B.shape
    J = np.zeros((2 * N, 2 * prob.n_ctrl))
    rhs = np.zeros(2 * N)
    for k in range(N):
        idx = (spans[k] - prob.degree + np.arange(w)) % prob.n_ctrl
        J[2 * k, 2 * idx] = B[k]
        J[2 * k + 1, 2 * idx + 1] = B[k]
        rhs[2 * k:2 * k + 2] = prob.points[k]
    ref, *_ = np.linalg.lstsq(J, rhs, rcond=None)
    assert np.linalg.norm(sol - ref) / np.linalg.norm(ref) < 1e-9


def test_pdm_stationary_when_points_on_curve():
    prob = make_problem("circle", 24, 6, seed=0)
    curve = default_initial_curve(prob)
    ts = np.linspace(0.0, 1.0, 24, endpoint=False)
    on_curve = evaluate_many(curve, ts)
    prob2 = objective.FitProblem(on_curve, 0.0, 0.0, 3, 6, True)
    model = assemble_pdm(prob2, curve, ts)
    resid = model.A @ curve.control_points.ravel() - model.b
    assert np.max(np.abs(resid)) < 1e-12


def test_step_optimality():
    prob = make_problem("noisy_circle", 50, 8, seed=1)
    curve = default_initial_curve(prob)
    ts = projected_params(prob, curve)
    model = assemble_sdm(prob, curve, ts)
    sol = solve_quadratic_step(model, prob).ravel()
    shift = 1e-12 * np.trace(model.A) / model.A.shape[0]
    resid = (model.A + shift * np.eye(model.A.shape[0])) @ sol - model.b
    assert np.max(np.abs(resid)) < 1e-9 * max(np.max(np.abs(model.b)), 1.0)


def test_tdm_displacement_directions():
    prob = make_problem("circle", 16, 6)
    curve = default_initial_curve(prob)
    ts = projected_params(prob, curve)
    frames = footpoint.frame_arrays(curve, ts, prob.points)
    pts, T, N_out = frames[0], frames[1], frames[2]
    delta = 0.05
    # tangential displacement is invisible to TDM
    Xt = pts + delta * T
    pt = objective.FitProblem(Xt, 0.0, 0.0, 3, 6, True)
    mt = assemble_tdm(pt, curve, ts)
    assert abs(mt.value(curve.control_points)) < 1e-12
    # normal displacement by delta contributes 0.5*delta^2 per point
    Xn = pts + delta * N_out
    pn = objective.FitProblem(Xn, 0.0, 0.0, 3, 6, True)
    mn = assemble_tdm(pn, curve, ts)
    assert np.isclose(mn.value(curve.control_points), 0.5 * 16 * delta ** 2, atol=1e-12)


def test_sdm_tangential_coefficients():
    # signed_d > 0 is the convex side (Eq-split d < 0): coeff = d/(d - rho)
    assert np.isclose(sdm_tangential_coefficients(1.0, 1.0), 0.5)  # d = -rho
    assert sdm_tangential_coefficients(1.0, 0.0) == 0.0            # on the curve
    assert sdm_tangential_coefficients(1.0, -0.5) == 0.0           # toward center
    assert sdm_tangential_coefficients(np.inf, 1.0) == 0.0         # straight piece
    assert sdm_tangential_coefficients(1.0, -2.0) == 1.0           # beyond center: clamp
    c = sdm_tangential_coefficients(np.array([1.0, 1.0]), np.array([3.0, 0.1]))
    assert np.all((c >= 0.0) & (c <= 1.0))


def test_sdm_equals_tdm_when_d_zero_and_rho_infinite():
    prob = make_problem("circle", 20, 6)
    curve = default_initial_curve(prob)
    ts = np.linspace(0.0, 1.0, 20, endpoint=False)
    # d = 0: data points exactly on the curve
    on_curve = evaluate_many(curve, ts)
    p0 = objective.FitProblem(on_curve, 0.0, 0.0, 3, 6, True)
    m_sdm = assemble_sdm(p0, curve, ts)
    m_tdm = assemble_tdm(p0, curve, ts)
    assert np.array_equal(m_sdm.A, m_tdm.A)
    assert np.array_equal(m_sdm.b, m_tdm.b)
    # rho infinite: straight open curve
    line = make_uniform_curve(4, 3, False,
                              np.array([[0.0, 0.0], [1 / 3, 0.0], [2 / 3, 0.0], [1.0, 0.0]]))
    X = np.stack([np.linspace(0.1, 0.9, 10), np.full(10, 0.2)], axis=1)
    pl = objective.FitProblem(X, 0.0, 0.0, 3, 4, False)
    tl = footpoint.project_all(line, X, 32).params
    assert np.array_equal(assemble_sdm(pl, line, tl).A, assemble_tdm(pl, line, tl).A)


def test_tdmlm_mu_arithmetic():
    assert tdmlm_mu(np.eye(2), 1) == 0.025
    A = np.diag([2.0, 4.0, 6.0, 8.0])
    assert np.isclose(tdmlm_mu(A, 2), 20.0 / 160.0)


def test_tdmlm_step_fixed_point():
    # if the current control points already solve A P = b, the step keeps them
    rng = np.random.default_rng(7)
    n = 5
    Q = rng.standard_normal((2 * n, 2 * n))
    A = Q @ Q.T + 2 * n * np.eye(2 * n)
    ctrl = rng.standard_normal((n, 2))
    b = A @ ctrl.ravel()
    model = classic.QuadraticModel(A, b, 0.0)
    out = solve_tdmlm_step(model, ctrl, closed=False, bandwidth=2 * n - 1)
    assert np.allclose(out, ctrl, atol=1e-10)


def test_tdmlm_step_matches_dense_oracle():
    rng = np.random.default_rng(8)
    n = 6
    Q = rng.standard_normal((2 * n, 2 * n))
    A = Q @ Q.T + np.eye(2 * n)
    b = rng.standard_normal(2 * n)
    ctrl = rng.standard_normal((n, 2))
    model = classic.QuadraticModel(A, b, 0.0)
    mu = tdmlm_mu(A, n)
    expect = np.linalg.solve(A + mu * np.eye(2 * n), b + mu * ctrl.ravel())
    got = solve_tdmlm_step(model, ctrl, closed=False, bandwidth=2 * n - 1).ravel()
    assert np.linalg.norm(got - expect) / np.linalg.norm(expect) < 1e-10


def test_large_system_solver_paths():
    # exercise the banded (open) and sparse (closed) factorization branches
    for closed in (False, True):
        prob = make_problem("noisy_circle", 300, 60, degree=3, closed=closed, seed=3)
        curve = default_initial_curve(prob)
        ts = projected_params(prob, curve)
        model = assemble_pdm(prob, curve, ts)
        sol = solve_quadratic_step(model, prob).ravel()
        ref = np.linalg.solve(
            model.A + 1e-12 * np.trace(model.A) / model.A.shape[0] * np.eye(model.A.shape[0]),
            model.b)
        assert np.linalg.norm(sol - ref) / np.linalg.norm(ref) < 1e-8


def test_pdm_monotone_error_prefix():
    prob = make_problem("circle", 100, 6)
    curve = default_initial_curve(prob)
    res = run_alternating("pdm", prob, curve, AltConfig(max_iterations=50))
    errs = [r.error for r in res.trace.records]
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("method", METHODS)
def test_exactly_representable_data(method):
    # data sampled from a spline is fit to near-zero error
    rng = np.random.default_rng(9)
    ang = 2.0 * np.pi * np.arange(6) / 6
    ctrl = 0.5 + 0.35 * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    target = make_uniform_curve(6, 3, True, ctrl)
    ts = np.linspace(0.0, 1.0, 60, endpoint=False)
    X = evaluate_many(target, ts)
    prob = objective.FitProblem(X, 0.0, 0.0, 3, 6, True)
    curve0 = target.with_control_points(ctrl + rng.normal(0, 0.02, ctrl.shape))
    # pdm contracts the error only by a factor ~0.999 per iteration here, so
    # it needs far more iterations than the Gauss-Newton-like methods
    cap = 20000 if method == "pdm" else 500
    res = run_alternating(method, prob, curve0, AltConfig(max_iterations=cap))
    assert res.trace.records[-1].error < 1e-6


def test_divergence_guard():
    prob = make_problem("noisy_circle", 150, 8, seed=8)
    curve = default_initial_curve(prob)
    res = run_alternating("sdm", prob, curve, AltConfig(max_iterations=100))
    assert res.trace.status == "diverged"


def test_unknown_method_rejected():
    prob = make_problem("circle", 10, 6)
    with pytest.raises(ValueError):
        run_alternating("newton", prob, default_initial_curve(prob))


def test_phase_timings_cover_iteration():
    prob = make_problem("circle", 100, 6)
    curve = default_initial_curve(prob)
    res = run_alternating("pdm", prob, curve, AltConfig(max_iterations=20))
    for rec in res.trace.records:
        total = sum(rec.phase_timings.values())
        assert total <= rec.iter_seconds * 1.05 + 1e-6
        assert total >= 0.5 * rec.iter_seconds
