"""scikit-learn style front ends for the two sampling settings."""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .convex_dp import estimate_set
from .criterion import DoseResponseData, StumpConfig, dose_response_pvalues
from .geometry import contains
from .smoothing import BandwidthPolicy, GridData, KernelSpec, kernel_estimate
from .tau import (
    DEFAULT_DELTA_THIN,
    search_options,
    tau_initial,
    tau_iterate,
    weighted_sample,
)

TAU_MODES = ("known", "init", "iterative")


class _BaselineZoneMixin:
    """Shared ``fit`` tail and membership prediction."""

    def _check_common(self):
        StumpConfig(0.0, self.gamma)  # validates gamma
        if self.tau_mode not in TAU_MODES:
            raise ValueError(f"tau_mode must be one of {TAU_MODES}, got {self.tau_mode!r}")
        if self.tau_mode == "known" and self.tau is None:
            raise ValueError("tau_mode='known' needs tau")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def _fit_data(self, data, kernel=None, policy=None, **search):
        opts = search_options(data, policy, **search)
        self.tau_fit_ = None
        if self.tau_mode == "iterative":
            self.tau_fit_, self.result_ = tau_iterate(
                data, StumpConfig(0.0, self.gamma), max_iters=self.max_iter,
                delta_thin=self.delta_thin, kernel=kernel, policy=policy, **opts)
            self.tau_ = self.tau_fit_.tau_refined
        else:
            self.tau_ = float(self.tau) if self.tau_mode == "known" else tau_initial(data, kernel, policy)
            sample = weighted_sample(data, StumpConfig(self.tau_, self.gamma), kernel, policy)
            self.result_ = estimate_set(sample, **opts)
        self.polygon_ = self.result_.polygon
        self.n_features_in_ = 2
        return self

    def predict(self, X) -> np.ndarray:
        """1 for points in the estimated baseline zone, else 0."""
        check_is_fitted(self, "polygon_")
        X = check_array(X, ensure_min_samples=0)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 features, got {X.shape[1]}")
        return contains(self.polygon_, X).astype(int)


class DoseResponseBaselineZone(_BaselineZoneMixin, BaseEstimator):
    """Convex baseline zone from replicated responses at scattered design points.

    Parameters
    ----------
    gamma : stump offset in (1/2, 1).
    tau : baseline level, used when ``tau_mode='known'``.
    tau_mode : ``'known'``, ``'init'`` (least-squares initial estimate) or
        ``'iterative'`` (alternate set estimation and thinned averaging).
    delta_thin, max_iter : settings of the iterative mode.
    """

    def __init__(self, gamma: float = 0.75, tau: Optional[float] = 0.0, tau_mode: str = "known",
                 delta_thin: float = DEFAULT_DELTA_THIN, max_iter: int = 5):
        self.gamma = gamma
        self.tau = tau
        self.tau_mode = tau_mode
        self.delta_thin = delta_thin
        self.max_iter = max_iter

    def fit(self, X, y, m: Optional[int] = None):
        """``y`` holds replicate means (then ``m`` is required) or an ``(n, m)`` replicate matrix."""
        self._check_common()
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 features, got {X.shape[1]}")
        y = np.asarray(y, dtype=float)
        if y.ndim == 2 and y.shape[1] > 1:
            if m is not None and m != y.shape[1]:
                raise ValueError("m disagrees with the replicate matrix")
            m, y = y.shape[1], y.mean(axis=1)
        elif m is None:
            raise ValueError("m is required when y holds replicate means")
        y = check_array(y.reshape(-1, 1)).ravel()
        if len(y) != len(X):
            raise ValueError("X and y differ in length")
        self.data_ = DoseResponseData(X, y, m)
        return self._fit_data(self.data_)

    def pvalues(self, X=None, y=None, m: Optional[int] = None) -> np.ndarray:
        """Non-normalized p-values at the fitted baseline (training data by default)."""
        check_is_fitted(self, "polygon_")
        data = self.data_ if X is None else DoseResponseData(X, y, m or self.data_.m)
        return dose_response_pvalues(data, StumpConfig(self.tau_, self.gamma))


class GridBaselineZone(_BaselineZoneMixin, BaseEstimator):
    """Convex baseline zone from one noisy response per point of an ``m x m`` grid.

    ``beta=None`` uses the rate-optimal exponent ``1 / (2 (p + 1))``.
    ``vertex_stride`` / ``max_candidates`` bound the optimizer's vertex set; see
    :func:`baselinezone.tau.search_options`.
    """

    def __init__(self, gamma: float = 0.75, tau: Optional[float] = 0.0, tau_mode: str = "known",
                 kernel: str = "epanechnikov", h0: float = 0.5, beta: Optional[float] = None,
                 p: float = 1.0, delta_thin: float = DEFAULT_DELTA_THIN, max_iter: int = 5,
                 vertex_stride: Optional[int] = None, max_candidates: Optional[int] = None):
        self.gamma = gamma
        self.tau = tau
        self.tau_mode = tau_mode
        self.kernel = kernel
        self.h0 = h0
        self.beta = beta
        self.p = p
        self.delta_thin = delta_thin
        self.max_iter = max_iter
        self.vertex_stride = vertex_stride
        self.max_candidates = max_candidates

    def policy(self) -> BandwidthPolicy:
        if self.beta is None:
            return BandwidthPolicy.rate_optimal(self.p, self.h0)
        return BandwidthPolicy(self.h0, self.beta)

    def fit(self, Y, y=None):
        """``Y[k-1, l-1]`` is the response at ``(k/m, l/m)``; ``y`` is ignored."""
        self._check_common()
        Y = check_array(Y)
        if Y.shape[0] != Y.shape[1] or Y.shape[0] < 2:
            raise ValueError(f"responses must form a square grid, got {Y.shape}")
        kernel, policy = KernelSpec(self.kernel), self.policy()
        self.data_ = GridData(Y.shape[0], Y)
        self.bandwidth_ = policy.bandwidth(self.data_.n)
        self.mu_hat_ = kernel_estimate(self.data_, kernel, self.bandwidth_)
        return self._fit_data(self.data_, kernel, policy, vertex_stride=self.vertex_stride,
                              max_candidates=self.max_candidates)
