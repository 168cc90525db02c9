import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from baselinezone.criterion import StumpConfig
from baselinezone.geometry import contains, thin
from baselinezone.smoothing import (
    BandwidthPolicy,
    GridData,
    KernelSpec,
    auto_vertex_stride,
    grid_coordinates,
    interior_mask,
    kernel_estimate,
    regression_weights,
)
from baselinezone.synth import GroundTruthScene, sample_grid, seed_sequence

EPAN = KernelSpec()


def test_constant_field_is_reproduced_in_the_interior():
    m, h, c = 200, 0.05, 3.0
    mu = kernel_estimate(GridData(m, np.full((m, m), c)), EPAN, h)
    mask = interior_mask(m, h)
    assert np.max(np.abs(mu[mask] - c)) <= 0.02 * c


def test_zero_field():
    assert not kernel_estimate(GridData(20, np.zeros((20, 20))), EPAN, 0.1).any()


def test_spike_support():
    m, h = 40, 0.1
    y = np.zeros((m, m))
    y[19, 9] = 1.0
    mu = kernel_estimate(GridData(m, y), EPAN, h)
    assert (mu >= 0).all()
    x = grid_coordinates(m)
    dist = np.abs(x - np.array([20 / m, 10 / m])).max(axis=1).reshape(m, m)
    assert not mu[dist >= h - 1e-12].any()
    assert mu[19, 9] > 0


@given(st.integers(0, 1000), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    y1, y2 = rng.normal(size=(2, 25, 25))
    f = lambda y: kernel_estimate(GridData(25, y), EPAN, 0.15)
    assert np.allclose(f(a * y1 + b * y2), a * f(y1) + b * f(y2), atol=1e-12, rtol=0)


def test_locality():
    m, h = 30, 0.1
    rng = np.random.default_rng(0)
    y = rng.normal(size=(m, m))
    y2 = y.copy()
    y2[10, 20] += 5.0
    diff = kernel_estimate(GridData(m, y2), EPAN, h) - kernel_estimate(GridData(m, y), EPAN, h)
    k, l = np.nonzero(np.abs(diff) > 0)
    assert np.all(np.abs(k - 10) < m * h) and np.all(np.abs(l - 20) < m * h)


@pytest.mark.parametrize("name,value", [("epanechnikov", 0.6), ("triangular", 2 / 3)])
def test_k0_square_integral(name, value):
    k = KernelSpec(name)
    assert quad(lambda u: float(k.k0(u)) ** 2, -1, 1)[0] == pytest.approx(value, rel=1e-9)
    assert quad(lambda u: float(k.k0(u)), -1, 1)[0] == pytest.approx(1.0, rel=1e-9)
    assert k.k0_sq_integral == pytest.approx(value)


def test_variance_constant():
    m, h, sigma = 200, 0.05, 1.0
    n = m * m
    rng = np.random.default_rng(seed_sequence(5, 0))
    # only one output point is needed: mu_hat(x0) = a^T Y a / (n h^2)
    u = np.arange(1, m + 1) / m
    a = EPAN.k0((0.5 - u) / h)
    vals = [np.sqrt(n) * h * (a @ rng.normal(0, sigma, (m, m)) @ a) / (n * h * h)
            for _ in range(500)]
    target = sigma ** 2 * EPAN.k_sq_integral
    assert np.var(vals, ddof=1) == pytest.approx(target, rel=0.10)


def test_interior_mask_examples():
    assert interior_mask(50, 0.0).all()
    # for h > 0 the points at coordinate 1 sit on the excluded edge
    tiny = interior_mask(50, 1e-9)
    assert tiny[:-1, :-1].all() and not tiny[-1].any() and not tiny[:, -1].any()
    mask = interior_mask(10, 0.15)
    u = np.arange(1, 11) / 10
    row = (u >= 0.15) & (u <= 0.85)
    assert np.array_equal(mask, row[:, None] & row[None, :])
    m, h = 500, 0.1
    assert interior_mask(m, h).mean() == pytest.approx((1 - 2 * h) ** 2, abs=0.01)
    with pytest.raises(ValueError):
        interior_mask(10, 0.5)


def test_regression_weights_flat_field():
    m = 40
    data = GridData(m, np.full((m, m), 2.0))
    pol = BandwidthPolicy(0.5, 0.25)
    h = pol.bandwidth(m * m)
    mu = kernel_estimate(data, EPAN, h)
    # shift tau to the smoothed value at one interior point
    s = regression_weights(data, EPAN, pol, StumpConfig(tau_hat=float(mu[20, 20])))
    k = np.flatnonzero(np.all(np.isclose(s.points, [21 / m, 21 / m]), axis=1))[0]
    assert s.weights[k] == pytest.approx(-0.25, abs=1e-12)
    assert s.n_total == m * m
    assert len(s) == interior_mask(m, h).sum()


def test_regression_weights_extremes():
    m = 40
    pol = BandwidthPolicy(0.5, 0.25)
    h = pol.bandwidth(m * m)
    data = GridData(m, np.zeros((m, m)))
    s = regression_weights(data, EPAN, pol, StumpConfig(tau_hat=0.0))
    assert np.all(s.weights == -0.25)
    s = regression_weights(data, EPAN, pol, StumpConfig(tau_hat=-10 / np.sqrt(m * m * h * h)))
    assert np.allclose(s.weights, 0.25, atol=1e-12)


def test_regression_weights_inside_thinned_zone():
    scene = GroundTruthScene()
    m = 100
    pol = BandwidthPolicy.rate_optimal(1.0)
    inner = thin(scene.s0_polygon(), 0.1)
    means = []
    for r in range(200):
        s = regression_weights(sample_grid(scene, m, seed_sequence(9, r)), EPAN, pol, StumpConfig(0.0))
        means.append(s.weights[contains(inner, s.points)].mean())
    assert np.mean(means) == pytest.approx(-0.25, abs=0.05)


def test_bandwidth_policy():
    assert BandwidthPolicy.rate_optimal(1.0).beta == 0.25
    assert BandwidthPolicy(0.5, 0.25).bandwidth(10_000) == pytest.approx(0.05)
    for beta in (0.0, 0.5):
        with pytest.raises(ValueError):
            BandwidthPolicy(0.5, beta)
    with pytest.raises(ValueError):
        KernelSpec("gaussian")


def test_grid_data_shape_checked():
    with pytest.raises(ValueError):
        GridData(3, np.zeros((3, 4)))


def test_auto_vertex_stride():
    assert auto_vertex_stride(50, 0.0707) == 1
    assert auto_vertex_stride(180, 0.0373) == 3
