"""Convex baseline-zone estimation from p-value stumps."""

__version__ = "0.1.0"

from .convex_dp import OptimizerResult, estimate_set  # noqa: E402
from .criterion import DoseResponseData, StumpConfig, WeightedSample  # noqa: E402
from .estimators import DoseResponseBaselineZone, GridBaselineZone  # noqa: E402
from .geometry import ConvexPolygon  # noqa: E402
from .smoothing import GridData  # noqa: E402
from .synth import GroundTruthScene  # noqa: E402

__all__ = [
    "ConvexPolygon",
    "DoseResponseBaselineZone",
    "DoseResponseData",
    "GridBaselineZone",
    "GridData",
    "GroundTruthScene",
    "OptimizerResult",
    "StumpConfig",
    "WeightedSample",
    "estimate_set",
]
