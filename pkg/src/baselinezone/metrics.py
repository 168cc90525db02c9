"""Discrepancies between an estimated polygon and the true baseline zone."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import ConvexPolygon, contains, hausdorff_distance, symmetric_difference_area
from .synth import GroundTruthScene, make_rng


def metric_d(est: ConvexPolygon, scene: GroundTruthScene) -> float:
    """Lebesgue measure of ``est`` symmetric-difference ``S0``.

    Curved ``S0`` is replaced by its inscribed 512-gon; ``scene.polygon_error``
    bounds the resulting error.
    """
    return symmetric_difference_area(est, scene.s0_polygon())


def metric_dF(est: ConvexPolygon, scene: GroundTruthScene, mc_points: int = 10**6,
              seed=0) -> tuple[float, float]:
    """Design measure of the symmetric difference, with its standard error.

    Exact (standard error 0) under the uniform design, Monte Carlo otherwise.
    """
    if scene.design.is_uniform:
        return metric_d(est, scene), 0.0
    x = scene.design.sample(mc_points, make_rng(seed))
    ind = contains(est, x) != contains(scene.s0_polygon(), x)
    p = float(ind.mean())
    return p, math.sqrt(p * (1.0 - p) / mc_points)


def metric_hausdorff(est: ConvexPolygon, scene: GroundTruthScene) -> float:
    """l-infinity Hausdorff distance to the polygonized ``S0``; ``inf`` for an empty estimate."""
    if est.is_empty:
        return math.inf
    return hausdorff_distance(est, scene.s0_polygon())


@dataclass
class MetricsBlock:
    d: float
    d_F: float
    d_F_se: float
    hausdorff: float
    hausdorff_empty: bool
    polygon_error: float

    def to_dict(self) -> dict:
        out = asdict(self)
        if not np.isfinite(self.hausdorff):
            out["hausdorff"] = None  # JSON has no infinity
        return out


def all_metrics(est: ConvexPolygon, scene: GroundTruthScene, mc_points: int = 10**6,
                seed=0) -> MetricsBlock:
    d_f, se = metric_dF(est, scene, mc_points, seed)
    return MetricsBlock(
        d=metric_d(est, scene),
        d_F=d_f,
        d_F_se=se,
        hausdorff=metric_hausdorff(est, scene),
        hausdorff_empty=est.is_empty,
        polygon_error=scene.polygon_error,
    )
