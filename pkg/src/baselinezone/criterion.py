"""Stump weights and the empirical / population criteria."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .geometry import ConvexPolygon, contains, intersection_area

DEFAULT_GAMMA = 0.75


@dataclass(frozen=True)
class StumpConfig:
    tau_hat: float = 0.0
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not 0.5 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (1/2, 1), got {self.gamma!r}")


@dataclass(frozen=True)
class DoseResponseData:
    """Design points with the mean of ``m`` replicate responses at each."""

    points: np.ndarray
    replicate_means: np.ndarray
    m: int
    sigma0: Optional[float] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        ybar = np.asarray(self.replicate_means, dtype=float).ravel()
        if len(pts) != len(ybar):
            raise ValueError("points and replicate_means differ in length")
        if int(self.m) < 1:
            raise ValueError("m must be a positive integer")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "replicate_means", ybar)
        object.__setattr__(self, "m", int(self.m))

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Lattice:
    """Integer grid coordinates ``(k, l)`` of the sample points on an ``m x m`` grid.

    Lets the optimizer count points below segments with column prefix sums.
    """

    index: np.ndarray
    m: int


@dataclass(frozen=True)
class WeightedSample:
    """Points with stump weights ``Phi(t_i) - gamma``.

    ``n_total`` is the criterion's normalizer; it exceeds ``len(points)`` in the
    regression setting where only the interior grid points carry weights.
    """

    points: np.ndarray
    weights: np.ndarray
    gamma: float = DEFAULT_GAMMA
    n_total: Optional[int] = None
    tau_hat: Optional[float] = None
    m: Optional[int] = None
    lattice: Optional[Lattice] = field(default=None, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(pts) != len(w):
            raise ValueError("points and weights differ in length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        if self.n_total is None:
            object.__setattr__(self, "n_total", len(pts))

    def __len__(self) -> int:
        return len(self.points)


def dose_response_pvalues(data: DoseResponseData, cfg: StumpConfig) -> np.ndarray:
    """Non-normalized p-values ``1 - Phi(sqrt(m) (Ybar - tau))``."""
    t = np.sqrt(data.m) * (data.replicate_means - cfg.tau_hat)
    return ndtr(-t)


def stump_weights(stat: np.ndarray, gamma: float) -> np.ndarray:
    return ndtr(np.asarray(stat, dtype=float)) - gamma


def dose_response_weights(data: DoseResponseData, cfg: StumpConfig) -> WeightedSample:
    t = np.sqrt(data.m) * (data.replicate_means - cfg.tau_hat)
    return WeightedSample(
        data.points, stump_weights(t, cfg.gamma), gamma=cfg.gamma, tau_hat=cfg.tau_hat, m=data.m
    )


def criterion_value(sample: WeightedSample, poly: ConvexPolygon) -> float:
    """``(1/n) sum_i w_i 1[X_i in poly]`` with closed-set inclusion."""
    if poly.is_empty or len(sample) == 0:
        return 0.0
    inside = contains(poly, sample.points)
    return float(np.sum(sample.weights[inside])) / sample.n_total


def population_criterion(scene, poly: ConvexPolygon, gamma: float = DEFAULT_GAMMA,
                         mc_points: int = 10**6, seed: int = 0) -> float:
    """Limit criterion ``(1/2 - gamma) F(S0 & S) + (1 - gamma) F(S0^c & S)``.

    Exact polygon areas under a uniform design, fixed-seed Monte Carlo otherwise.
    """
    if poly.is_empty:
        return 0.0
    s0 = scene.s0_polygon()
    design = scene.design
    if design.is_uniform:
        f_in = intersection_area(s0, poly)
        f_all = poly.area
    else:
        x = design.sample(mc_points, np.random.default_rng(seed))
        in_s = contains(poly, x)
        f_all = in_s.mean()
        f_in = (in_s & contains(s0, x)).mean()
    return (0.5 - gamma) * f_in + (1.0 - gamma) * (f_all - f_in)
