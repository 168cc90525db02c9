"""Estimating the baseline level when it is unknown.

``tau_init_*`` minimize the squared distance of the stump statistic from 1/2;
``tau_refine`` averages responses over a thinned set estimate; ``tau_iterate``
alternates set estimation and refinement.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import ndtr

from .convex_dp import OptimizerResult, estimate_set
from .criterion import DoseResponseData, StumpConfig, WeightedSample, dose_response_weights
from .geometry import contains, thin
from .smoothing import (
    GRID_MAX_CANDIDATES,
    auto_vertex_stride,
    BandwidthPolicy,
    GridData,
    KernelSpec,
    grid_coordinates,
    interior_mask,
    kernel_estimate,
    regression_weights,
)

SCAN_POINTS = 512
X_TOL = 1e-8
TIE_TOL = 1e-12
DEFAULT_DELTA_THIN = 0.05

Data = Union[DoseResponseData, GridData]


class EmptyThinnedSetError(ValueError):
    """The thinned estimate contains no data points."""


@dataclass
class TauFit:
    tau_init: float
    tau_refined: float
    iterations: int
    delta_thin: float
    converged: bool
    fallback: bool = False
    history: list = field(default_factory=list)
    criteria: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _objective(values: np.ndarray, scale: float):
    def g(tau):
        return float(np.mean((ndtr(scale * (values - tau)) - 0.5) ** 2))
    return g


def _minimize_1d(values: np.ndarray, scale: float) -> float:
    """Global minimizer of the objective on ``[min, max]`` of ``values``.

    A coarse scan picks the basin (smallest ``tau`` among near-ties), then a
    bounded Brent search polishes inside the neighbouring scan cells.
    """
    values = np.asarray(values, dtype=float).ravel()
    lo, hi = float(values.min()), float(values.max())
    if hi - lo <= X_TOL:
        return lo
    g = _objective(values, scale)
    grid = np.linspace(lo, hi, SCAN_POINTS)
    vals = np.concatenate([
        np.mean((ndtr(scale * (values[None, :] - grid[k:k + 32, None])) - 0.5) ** 2, axis=1)
        for k in range(0, SCAN_POINTS, 32)
    ])
    i = int(np.flatnonzero(vals <= vals.min() + TIE_TOL)[0])
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, SCAN_POINTS - 1)]
    res = minimize_scalar(g, bounds=(a, b), method="bounded", options={"xatol": X_TOL})
    if res.success and res.fun <= vals[i]:
        return float(res.x)
    return float(grid[i])


def tau_init_dose(data: DoseResponseData) -> float:
    """``argmin_tau mean_i [Phi(sqrt(m) (Ybar_i - tau)) - 1/2]^2``."""
    if data.n < 1:
        raise ValueError("no data")
    return _minimize_1d(data.replicate_means, np.sqrt(data.m))


def tau_init_regression(data: GridData, kernel: KernelSpec, policy: BandwidthPolicy) -> float:
    """Regression analogue over the interior grid with scale ``sqrt(n h^2)``."""
    h = policy.bandwidth(data.n)
    mask = interior_mask(data.m, h, kernel.L0)
    mu_hat = kernel_estimate(data, kernel, h)
    return _minimize_1d(mu_hat[mask], np.sqrt(data.n) * h)


def _responses(data: Data):
    if isinstance(data, DoseResponseData):
        return data.points, data.replicate_means
    return grid_coordinates(data.m), data.responses.ravel()


def tau_refine(estimate: OptimizerResult, data: Data,
               delta_thin: float = DEFAULT_DELTA_THIN) -> float:
    """Mean response at the data points inside the ``delta_thin``-thinned estimate."""
    inner = thin(estimate.polygon, delta_thin)
    if inner.is_empty:
        raise EmptyThinnedSetError(f"thinning by {delta_thin} empties the estimate")
    pts, y = _responses(data)
    sel = contains(inner, pts)
    if not np.any(sel):
        raise EmptyThinnedSetError("the thinned estimate contains no data points")
    return float(np.mean(y[sel]))


def weighted_sample(data: Data, cfg: StumpConfig, kernel: Optional[KernelSpec] = None,
                    policy: Optional[BandwidthPolicy] = None) -> WeightedSample:
    if isinstance(data, DoseResponseData):
        return dose_response_weights(data, cfg)
    return regression_weights(data, kernel or KernelSpec(), policy or BandwidthPolicy(), cfg)


def search_options(data: Data, policy: Optional[BandwidthPolicy] = None,
                   vertex_stride: Optional[int] = None,
                   max_candidates: Optional[int] = None) -> dict:
    """Keyword arguments for :func:`estimate_set`.

    Scattered data always searches every candidate vertex.  Grid data defaults
    to :func:`auto_vertex_stride` capped at ``GRID_MAX_CANDIDATES`` vertices.
    """
    if isinstance(data, DoseResponseData):
        return {"vertex_stride": 1 if vertex_stride is None else vertex_stride}
    if vertex_stride is None:
        vertex_stride = auto_vertex_stride(data.m, (policy or BandwidthPolicy()).bandwidth(data.n))
    if max_candidates is None:
        max_candidates = GRID_MAX_CANDIDATES
    return {"vertex_stride": vertex_stride, "max_candidates": max_candidates}


def tau_initial(data: Data, kernel: Optional[KernelSpec] = None,
                policy: Optional[BandwidthPolicy] = None) -> float:
    if isinstance(data, DoseResponseData):
        return tau_init_dose(data)
    return tau_init_regression(data, kernel or KernelSpec(), policy or BandwidthPolicy())


def tau_iterate(data: Data, cfg: Optional[StumpConfig] = None, max_iters: int = 5,
                delta_thin: float = DEFAULT_DELTA_THIN, tol: float = 1e-6,
                kernel: Optional[KernelSpec] = None, policy: Optional[BandwidthPolicy] = None,
                vertex_stride: Optional[int] = None,
                max_candidates: Optional[int] = None) -> tuple[TauFit, OptimizerResult]:
    """Alternate set estimation and refinement until ``|delta tau| <= tol``.

    Returns the fit and the set estimate computed at the final ``tau``.  When
    thinning empties the estimate the current ``tau`` is kept (``fallback``).
    ``vertex_stride`` / ``max_candidates`` left as ``None`` take the defaults
    of :func:`search_options`.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    opts = search_options(data, policy, vertex_stride, max_candidates)
    gamma = (cfg or StumpConfig()).gamma
    tau0 = tau_initial(data, kernel, policy)
    tau = tau0
    fit = TauFit(tau0, tau0, 0, delta_thin, False, history=[tau0])
    result = None
    for _ in range(max_iters):
        sample = weighted_sample(data, StumpConfig(tau, gamma), kernel, policy)
        result = estimate_set(sample, **opts)
        fit.iterations += 1
        fit.criteria.append(result.criterion)
        try:
            new = tau_refine(result, data, delta_thin)
        except EmptyThinnedSetError:
            fit.fallback = True
            break
        fit.history.append(new)
        step = abs(new - tau)
        tau = new
        if step <= tol:
            fit.converged = True
            break
    fit.tau_refined = tau
    if result is None or (not fit.converged and not fit.fallback):
        sample = weighted_sample(data, StumpConfig(tau, gamma), kernel, policy)
        result = estimate_set(sample, **opts)
    return fit, result
