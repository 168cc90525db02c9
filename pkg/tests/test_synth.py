import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from baselinezone.geometry import fatten
from baselinezone.io import parse_key_values
from baselinezone.synth import (
    Design,
    GroundTruthScene,
    _standard_errors,
    linf_distance_to_disc,
    perturbed_polygon,
    sample_dose_response,
    sample_grid,
    seed_sequence,
)
from baselinezone.io import format_key_values

SCENE = GroundTruthScene()


def _brute_disc_distance(x, c=(0.5, 0.5), r=0.25, k=200_000):
    th = np.linspace(0, 2 * np.pi, k, endpoint=False)
    b = np.column_stack([c[0] + r * np.cos(th), c[1] + r * np.sin(th)])
    return np.abs(b - x).max(axis=1).min()


def test_mu_reference_values():
    assert SCENE.mu([[0.5, 0.5]])[0] == SCENE.tau0
    assert SCENE.mu([[0.85, 0.5]])[0] == pytest.approx(0.1, abs=1e-12)
    assert SCENE.mu([[0.99, 0.99]])[0] >= SCENE.tau0 + SCENE.delta0


@given(st.floats(0, 1), st.floats(0, 1))
def test_disc_distance_matches_boundary_search(x, y):
    p = np.array([x, y])
    got = linf_distance_to_disc(p, (0.5, 0.5), 0.25)[0]
    if np.hypot(x - 0.5, y - 0.5) <= 0.25:
        assert got == 0.0
    else:
        assert got == pytest.approx(_brute_disc_distance(p), abs=2e-5)


def test_sandwich_equality_near_boundary():
    g = (np.arange(300) + 0.5) / 300
    x = np.array(np.meshgrid(g, g)).reshape(2, -1).T
    rho = SCENE.distance(x)
    near = rho < SCENE.kappa0
    np.testing.assert_allclose(SCENE.mu(x)[near], SCENE.tau0 + SCENE.C0 * rho[near] ** SCENE.p,
                               rtol=0, atol=1e-15)


@pytest.mark.parametrize("scene", [SCENE, SCENE.with_(p=2.0, C0=20.0),
                                   GroundTruthScene(shape="ellipse", rx=0.3, ry=0.15),
                                   GroundTruthScene(shape="polygon",
                                                    vertices=((0.2, 0.2), (0.8, 0.3), (0.4, 0.8)))])
def test_separation_outside_fattening(scene):
    g = (np.arange(500) + 0.5) / 500
    x = np.array(np.meshgrid(g, g)).reshape(2, -1).T
    outside = scene.distance(x) > scene.kappa0
    assert scene.mu(x)[outside].min() >= scene.tau0 + scene.delta0 - 1e-12
    # and mu equals tau0 on S0
    inside = scene.in_s0(x)
    assert np.all(np.abs(scene.mu(x)[inside] - scene.tau0) < 1e-12)


def test_noiseless_samples_are_exact():
    s = SCENE.with_(sigma0=0.0)
    d = sample_dose_response(s, 7, 300, 1)
    np.testing.assert_array_equal(d.replicate_means, s.mu(d.points))
    g = sample_grid(s, 30, 1)
    np.testing.assert_array_equal(g.responses.ravel(), s.mu(g.coordinates()))


def test_seed_determinism():
    a = sample_dose_response(SCENE, 10, 50, seed_sequence(7, 3))
    b = sample_dose_response(SCENE, 10, 50, seed_sequence(7, 3))
    c = sample_dose_response(SCENE, 10, 50, seed_sequence(7, 4))
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.replicate_means, b.replicate_means)
    assert not np.array_equal(a.points, c.points)
    assert not np.array_equal(sample_grid(SCENE, 20, 1).responses, sample_grid(SCENE, 20, 2).responses)


def test_fraction_in_s0_matches_area():
    n = 10_000
    d = sample_dose_response(SCENE, 1, n, 2024)
    p = math.pi * 0.25 ** 2
    frac = SCENE.in_s0(d.points).mean()
    assert abs(frac - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_grid_noise_mean():
    m = 200
    g = sample_grid(SCENE, m, 5)
    resid = g.responses.ravel() - SCENE.mu(g.coordinates())
    assert abs(resid.mean()) <= 3 * SCENE.sigma0 / m


def test_replicate_mean_variance():
    d = sample_dose_response(SCENE.with_(error_law="exponential"), 16, 20_000, 3)
    resid = d.replicate_means - SCENE.mu(d.points)
    assert np.var(resid) == pytest.approx(SCENE.sigma0 ** 2 / 16, rel=0.05)


@pytest.mark.parametrize("law", ["gaussian", "exponential", "t5"])
def test_error_laws_standardized(law):
    e = _standard_errors(law, 200_000, np.random.default_rng(9))
    assert abs(e.mean()) < 0.02
    assert e.var() == pytest.approx(1.0, abs=0.04)


@pytest.mark.parametrize("scene", [
    SCENE,
    GroundTruthScene(shape="ellipse", cx=0.45, rx=0.3, ry=0.2, tau0=-1.25, sigma0=0.1 + 0.2),
    GroundTruthScene(shape="polygon", vertices=((0.2, 0.2), (0.8, 0.3), (0.4, 0.8)),
                     design=Design([[2.0, 1.0], [1.0, 3.0]]), error_law="t5"),
])
def test_scene_round_trip_is_exact(scene):
    back = GroundTruthScene.from_config(parse_key_values(format_key_values(scene.to_config())))
    assert back == scene
    assert back.to_config() == scene.to_config()


@pytest.mark.parametrize("kw, match", [
    (dict(r=0.6), "inside"),
    (dict(r=-0.1), "positive"),
    (dict(delta0=0.5), "separation"),
    (dict(sigma0=-1.0), "non-negative"),
    (dict(error_law="cauchy"), "error_law"),
    (dict(shape="blob"), "shape"),
])
def test_scene_validation(kw, match):
    with pytest.raises(ValueError, match=match):
        GroundTruthScene(**kw)


def test_design_density_and_sampling():
    d = Design([[2.0], [1.0]])
    assert d.density([[0.2, 0.5], [0.8, 0.5]]).tolist() == pytest.approx([4 / 3, 2 / 3])
    x = d.sample(60_000, np.random.default_rng(0))
    assert (x[:, 0] < 0.5).mean() == pytest.approx(2 / 3, abs=0.01)
    assert Design.from_config(d.to_config()) == d
    with pytest.raises(ValueError):
        Design([[0.0]])


def test_polygon_error_small():
    assert 0 < SCENE.polygon_error < 1e-5
    assert GroundTruthScene(shape="polygon", vertices=((0.2, 0.2), (0.8, 0.2), (0.5, 0.7))).polygon_error == 0


def test_perturbations_are_convex_and_nearby():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = perturbed_polygon(SCENE, rng)
        assert not p.is_empty
        assert fatten(SCENE.s0_polygon(), 0.2).area >= p.area
