"""Cartoon + texture decomposition.

The binding-ball step image has closed-form optima: the texture plateau
saturates the dual ball (height 4*mu/N per sign, so ||v||/||I|| =
4*sqrt(2)*mu/N) and the fidelity shift gives ||r|| = 4/lam exactly,
independent of the image side.  Both serve as oracles below.
"""

import numpy as np
import pytest

from ewtseg.cartoon import (DecompositionConfig, decompose, decompose_auto,
                            default_params, project_g_ball, _div)
from ewtseg.ewt2d import detect_radial_boundaries
from ewtseg.modes import BoundarySet


def _step_image(n=64):
    img = np.zeros((n, n))
    img[:, n // 2:] = 1.0
    return img


def _sine_image(n=96):
    wave = 0.25 * np.cos(0.8 * np.pi * np.arange(n))[None, :] * np.ones((n, 1))
    return 0.5 + wave, wave


def _assert_objective_nonincreasing(objectives):
    obj = np.asarray(objectives)
    assert len(obj) >= 1 and np.isfinite(obj).all()
    if len(obj) > 1:
        assert np.all(np.diff(obj) <= 1e-8 * max(1.0, obj[0]))


def test_config_validation():
    for bad in [dict(mu=0.0, lam=1.0), dict(mu=1.0, lam=-2.0),
                dict(mu=1.0, lam=1.0, tol=0.0),
                dict(mu=1.0, lam=1.0, max_outer_iters=0),
                dict(mu=1.0, lam=1.0, projection_iters=0)]:
        with pytest.raises(ValueError):
            DecompositionConfig(**bad)


def test_default_params_rules():
    cfg = default_params(np.zeros((512, 512)),
                         BoundarySet.from_interior([np.pi / 4]))
    assert cfg.mu == 256.0
    assert cfg.lam == pytest.approx(np.pi / 8)
    assert cfg.max_outer_iters == 200 and cfg.tol == 1e-4


def test_default_params_rectangular_uses_geometric_mean_side():
    cfg = default_params(np.zeros((32, 128)),
                         BoundarySet.from_interior([1.0]))
    assert cfg.mu == 32.0


def test_default_params_constant_image_falls_back():
    img = np.full((64, 64), 0.4)
    radii = detect_radial_boundaries(img)
    with pytest.warns(UserWarning):
        cfg = default_params(img, radii)
    assert cfg.lam == pytest.approx(np.pi / 8)


def test_step_image_stays_in_cartoon():
    img = _step_image(64)
    res = decompose(img, DecompositionConfig(mu=0.5, lam=5.0))
    ratio = np.linalg.norm(res.texture) / np.linalg.norm(img)
    assert ratio <= 0.1
    # ball saturation: v is a two-sign plateau of height 4*mu/N
    assert ratio == pytest.approx(4 * np.sqrt(2) * 0.5 / 64, rel=2e-2)
    assert abs(res.texture.mean()) < 1e-6
    assert res.residual_norm == pytest.approx(4.0 / 5.0, rel=2e-2)
    _assert_objective_nonincreasing(res.objectives)


def test_sinusoid_goes_to_texture():
    img, wave = _sine_image(96)
    radii = detect_radial_boundaries(img)
    assert radii.n_modes >= 2      # the oscillation produces a ring to detect
    res = decompose(img, default_params(img, radii))
    corr = np.corrcoef(res.texture.ravel(), wave.ravel())[0, 1]
    assert corr >= 0.9
    assert np.abs(res.cartoon - 0.5).max() <= 0.01
    assert abs(res.texture.mean()) < 1e-6
    _assert_objective_nonincreasing(res.objectives)


def test_lambda_sweep_residual_decreases():
    img = _step_image(64)
    residuals = []
    for lam in [2.5, 5.0, 10.0, 20.0]:
        res = decompose(img, DecompositionConfig(mu=0.5, lam=lam, tol=1e-6,
                                                 max_outer_iters=400))
        residuals.append(res.residual_norm)
        assert res.residual_norm == pytest.approx(4.0 / lam, rel=2e-2)
    assert all(b < a for a, b in zip(residuals, residuals[1:]))


def test_objective_monotone_on_mixed_content():
    rng = np.random.default_rng(7)
    n = 64
    img = _step_image(n) + 0.2 * np.cos(0.7 * np.pi * np.arange(n))[None, :] \
        + 0.05 * rng.normal(size=(n, n))
    res = decompose(img, DecompositionConfig(mu=2.0, lam=3.0))
    _assert_objective_nonincreasing(res.objectives)
    assert len(res.objectives) == res.iterations_used
    assert np.isfinite(res.residual_norm)


def test_grayshift_equivariance():
    img, _ = _sine_image(64)
    cfg = DecompositionConfig(mu=10.0, lam=1.0)
    base = decompose(img, cfg)
    shifted = decompose(img + 0.3, cfg)
    assert shifted.iterations_used == base.iterations_used
    assert np.abs(shifted.cartoon - (base.cartoon + 0.3)).max() < 1e-6
    assert np.abs(shifted.texture - base.texture).max() < 1e-6


def test_projection_clamps_dual_field_exactly():
    rng = np.random.default_rng(1)
    w = rng.normal(size=(40, 40))
    v, (xi_y, xi_x) = project_g_ball(w, 0.5)
    assert np.abs(xi_y).max() <= 0.5 and np.abs(xi_x).max() <= 0.5
    np.testing.assert_array_equal(v, _div(xi_y, xi_x))
    assert abs(v.mean()) < 1e-12
    assert np.linalg.norm(v - w) <= np.linalg.norm(w)


def test_projection_distance_monotone_under_warm_restarts():
    rng = np.random.default_rng(2)
    w = rng.normal(size=(40, 40))
    xi = None
    dist = np.linalg.norm(w)
    for _ in range(8):
        v, xi = project_g_ball(w, 0.3, n_iters=5, xi=xi)
        d = np.linalg.norm(v - w)
        assert d <= dist + 1e-12
        dist = d


def test_projection_recovers_small_ball_element():
    rng = np.random.default_rng(3)
    xi0 = (0.01 * rng.uniform(-1, 1, (40, 40)),
           0.01 * rng.uniform(-1, 1, (40, 40)))
    w = _div(*xi0)
    v, _ = project_g_ball(w, 1.0, n_iters=300)
    assert np.linalg.norm(v - w) / np.linalg.norm(w) < 0.01


def test_projection_rejects_bad_mu():
    with pytest.raises(ValueError):
        project_g_ball(np.zeros((32, 32)), 0.0)


def test_nonfinite_intermediate_names_iteration():
    img = _step_image(64)
    img[0, 0] = np.nan
    with pytest.raises(RuntimeError, match="iteration 1"):
        decompose(img, DecompositionConfig(mu=1.0, lam=5.0))


def test_decompose_auto_matches_manual_params():
    img, _ = _sine_image(64)
    auto = decompose_auto(img, tol=1e-3)
    cfg = default_params(img, detect_radial_boundaries(img))
    cfg.tol = 1e-3
    manual = decompose(img, cfg)
    np.testing.assert_array_equal(auto.cartoon, manual.cartoon)
    np.testing.assert_array_equal(auto.texture, manual.texture)
