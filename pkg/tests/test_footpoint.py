import numpy as np
import pytest

from splinefit import footpoint
from splinefit.footpoint import (
    ORTHO_TOL, dense_parameter_samples, frame_at, project_all, refine_all,
    refine_footpoint, should_reinitialize,
)
from splinefit.geometry import evaluate, evaluate_jet, evaluate_many, make_uniform_curve

from conftest import random_curve


def circle_curve(n=40, radius=0.4, center=(0.5, 0.5)):
    # dense closed cubic approximating a circle; control-polygon radius chosen
    # so the curve interpolates the circle at the knots
    ang = 2.0 * np.pi * np.arange(n) / n
    ctrl = np.array(center) + radius * 3.0 / (2.0 + np.cos(2.0 * np.pi / n)) * \
        np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return make_uniform_curve(n, 3, True, ctrl)


def test_on_curve_point_projects_to_itself():
    rng = np.random.default_rng(0)
    curve = random_curve(rng, degree=3, closed=True)
    t_true = 0.3
    X = evaluate(curve, t_true)
    proj = project_all(curve, X[None, :], 32)
    assert abs(proj.params[0] - t_true) < 1e-8
    d = np.linalg.norm(evaluate(curve, proj.params[0]) - X)
    assert d < 1e-10


def test_orthogonality_of_projections():
    rng = np.random.default_rng(1)
    curve = circle_curve()
    X = rng.uniform(0.0, 1.0, size=(50, 2))
    proj = project_all(curve, X, 32)
    assert np.all(proj.converged)
    for t, x in zip(proj.params, X):
        p, dp, _ = evaluate_jet(curve, t)
        assert abs(float(np.dot(x - p, dp))) < ORTHO_TOL


def test_refinement_never_worsens_dense_seed():
    rng = np.random.default_rng(2)
    for _ in range(10):
        curve = random_curve(rng)
        X = rng.uniform(-0.2, 1.2, size=(8, 2))
        ts = dense_parameter_samples(curve, 32)
        samples = evaluate_many(curve, ts)
        proj = project_all(curve, X, 32)
        refined = evaluate_many(curve, proj.params)
        d_ref = np.linalg.norm(refined - X, axis=1)
        d_seed = np.min(np.linalg.norm(samples[None, :, :] - X[:, None, :], axis=2), axis=1)
        assert np.all(d_ref <= d_seed + 1e-12)


def test_straight_line_one_step_exact():
    curve = make_uniform_curve(2, 1, False, np.array([[0.0, 0.0], [1.0, 0.0]]))
    t, ok = refine_footpoint(curve, np.array([0.3, 0.7]), 0.9)
    assert ok
    assert abs(t - 0.3) < 1e-12


def test_orthogonal_seed_unchanged():
    curve = circle_curve()
    X = np.array([0.9, 0.5])  # on the +x axis from the center
    proj = project_all(curve, X[None, :], 64)
    t0 = proj.params[0]
    t, ok = refine_footpoint(curve, X, t0)
    assert ok and abs(t - t0) < 1e-12


def test_frame_on_circle():
    r = 0.4
    curve = circle_curve(radius=r)
    fr = frame_at(curve, 0.125, np.array([0.5, 0.5]))
    assert abs(fr.curvature_radius - r) / r < 0.01
    assert np.isclose(np.linalg.norm(fr.tangent), 1.0, atol=1e-12)
    assert np.isclose(np.linalg.norm(fr.normal), 1.0, atol=1e-12)
    assert abs(float(np.dot(fr.tangent, fr.normal))) < 1e-12
    # center of the circle lies opposite the outward normal: signed_d < 0
    assert fr.signed_d < 0
    # a far exterior point lies along the outward normal: signed_d > 0
    far = fr.point + 0.3 * fr.normal
    fr2 = frame_at(curve, 0.125, far)
    assert fr2.signed_d > 0
    assert np.isclose(abs(fr2.signed_d), np.linalg.norm(far - fr2.point), atol=1e-12)


def test_frame_on_straight_segment():
    curve = make_uniform_curve(4, 3, False,
                               np.array([[0.0, 0.0], [1 / 3, 0.0], [2 / 3, 0.0], [1.0, 0.0]]))
    fr = frame_at(curve, 0.5, np.array([0.5, 0.2]))
    assert np.isinf(fr.curvature_radius)


def test_frame_rejects_low_degree():
    curve = make_uniform_curve(2, 1, False, np.array([[0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        frame_at(curve, 0.5, np.array([0.5, 0.5]))


def test_should_reinitialize_cases():
    assert should_reinitialize(1.0, 0.5)            # ratio 1.0
    assert not should_reinitialize(1.0, 0.95)       # ratio ~0.053
    assert not should_reinitialize(0.7, 0.7)        # zero ratio
    assert not should_reinitialize(1.0, 0.0)        # perfect fit


def test_dense_parameter_samples_contract():
    curve = circle_curve(n=8)
    ts = dense_parameter_samples(curve, 4)
    assert ts.shape == (32,)
    assert ts[0] == 0.0 and ts[-1] < 1.0  # closed: endpoint excluded
    with pytest.raises(ValueError):
        dense_parameter_samples(curve, 1)


def test_refine_all_reuses_seeds():
    curve = circle_curve()
    X = np.array([[0.95, 0.5], [0.5, 0.95]])
    good = project_all(curve, X, 64)
    again = refine_all(curve, X, good.params)
    assert np.allclose(again.params, good.params, atol=1e-9)
