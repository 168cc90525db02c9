import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from baselinezone import DoseResponseBaselineZone, GridBaselineZone
from baselinezone.convex_dp import estimate_set
from baselinezone.criterion import StumpConfig, dose_response_weights
from baselinezone.synth import GroundTruthScene, sample_dose_response, sample_grid

SCENE = GroundTruthScene()


def test_params_and_clone():
    est = DoseResponseBaselineZone(gamma=0.8, tau_mode="iterative", max_iter=3)
    assert est.get_params() == {"gamma": 0.8, "tau": 0.0, "tau_mode": "iterative",
                                "delta_thin": 0.05, "max_iter": 3}
    c = clone(est)
    assert c.get_params() == est.get_params() and c is not est
    g = GridBaselineZone(h0=0.4).set_params(kernel="triangular")
    assert clone(g).get_params()["kernel"] == "triangular"


def test_dose_known_matches_functional_api():
    d = sample_dose_response(SCENE, 50, 300, 1)
    est = DoseResponseBaselineZone().fit(d.points, d.replicate_means, m=d.m)
    ref = estimate_set(dose_response_weights(d, StumpConfig(0.0)))
    assert est.polygon_ == ref.polygon
    assert est.tau_ == 0.0 and est.tau_fit_ is None
    pred = est.predict(d.points)
    assert set(np.unique(pred)) <= {0, 1}
    assert pred.sum() == len(ref.included)
    assert est.pvalues().shape == (300,)


def test_dose_accepts_replicate_matrix():
    rng = np.random.default_rng(0)
    x = rng.random((80, 2))
    reps = SCENE.mu(x)[:, None] + 0.5 * rng.standard_normal((80, 20))
    a = DoseResponseBaselineZone().fit(x, reps)
    b = DoseResponseBaselineZone().fit(x, reps.mean(axis=1), m=20)
    assert a.polygon_ == b.polygon_
    with pytest.raises(ValueError):
        DoseResponseBaselineZone().fit(x, reps, m=5)


@pytest.mark.parametrize("mode", ["init", "iterative"])
def test_dose_estimated_tau_modes(mode):
    d = sample_dose_response(SCENE, 100, 300, 2)
    est = DoseResponseBaselineZone(tau=None, tau_mode=mode).fit(d.points, d.replicate_means, m=d.m)
    assert np.isfinite(est.tau_) and abs(est.tau_) < 0.3
    assert (est.tau_fit_ is not None) == (mode == "iterative")


def test_grid_estimator():
    g = sample_grid(SCENE, 40, 3)
    est = GridBaselineZone().fit(g.responses)
    assert est.bandwidth_ == pytest.approx(0.5 * (40 * 40) ** -0.25)
    assert est.mu_hat_.shape == (40, 40)
    assert est.predict([[0.5, 0.5], [0.02, 0.02]]).tolist() == [1, 0]


@pytest.mark.parametrize("kw", [dict(gamma=0.4), dict(tau_mode="guess"), dict(tau=None),
                                dict(max_iter=0)])
def test_validation(kw):
    d = sample_dose_response(SCENE, 10, 20, 0)
    with pytest.raises(ValueError):
        DoseResponseBaselineZone(**kw).fit(d.points, d.replicate_means, m=10)


def test_input_checks():
    with pytest.raises(NotFittedError):
        DoseResponseBaselineZone().predict([[0.1, 0.2]])
    with pytest.raises(ValueError):
        DoseResponseBaselineZone().fit(np.zeros((5, 3)), np.zeros(5), m=2)
    with pytest.raises(ValueError):
        DoseResponseBaselineZone().fit(np.zeros((5, 2)), np.zeros(5))
    with pytest.raises(ValueError):
        GridBaselineZone().fit(np.zeros((4, 5)))
