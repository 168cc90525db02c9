"""Kernel smoothing on the fixed ``m x m`` design grid.

Grid convention: ``responses[k-1, l-1]`` is the response at ``(k/m, l/m)`` for
``k, l = 1..m``; row ``k`` holds a fixed first coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .criterion import Lattice, StumpConfig, WeightedSample, stump_weights

_K0 = {
    "epanechnikov": lambda u: np.where(np.abs(u) < 1.0, 0.75 * (1.0 - u * u), 0.0),
    "triangular": lambda u: np.clip(1.0 - np.abs(u), 0.0, None),
}
# integral of K0^2 over the line
_K0_SQ = {"epanechnikov": 3.0 / 5.0, "triangular": 2.0 / 3.0}


@dataclass(frozen=True)
class GridData:
    m: int
    responses: np.ndarray
    sigma0: Optional[float] = None

    def __post_init__(self):
        y = np.asarray(self.responses, dtype=float)
        if y.shape != (int(self.m), int(self.m)):
            raise ValueError(f"responses must be {self.m}x{self.m}, got {y.shape}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "responses", y)

    @property
    def n(self) -> int:
        return self.m * self.m

    def coordinates(self) -> np.ndarray:
        return grid_coordinates(self.m)


def grid_coordinates(m: int) -> np.ndarray:
    """``(m*m, 2)`` array of grid points in row-major order."""
    u = np.arange(1, m + 1) / m
    uu, vv = np.meshgrid(u, u, indexing="ij")
    return np.column_stack([uu.ravel(), vv.ravel()])


@dataclass(frozen=True)
class KernelSpec:
    """Product kernel ``K(x1, x2) = K0(x1) K0(x2)`` with ``K0`` supported on ``[-L0, L0]``."""

    name: str = "epanechnikov"
    L0: float = 1.0

    def __post_init__(self):
        if self.name not in _K0:
            raise ValueError(f"unknown kernel {self.name!r}; choose from {sorted(_K0)}")

    def k0(self, u):
        return _K0[self.name](np.asarray(u, dtype=float) / self.L0) / self.L0

    @property
    def lipschitz_bound(self) -> float:
        return (1.5 if self.name == "epanechnikov" else 1.0) / self.L0 ** 2

    @property
    def k0_sq_integral(self) -> float:
        return _K0_SQ[self.name] / self.L0

    @property
    def k_sq_integral(self) -> float:
        """Integral of the squared product kernel over the plane."""
        return self.k0_sq_integral ** 2


@dataclass(frozen=True)
class BandwidthPolicy:
    """``h_n = h0 * n**(-beta)`` with ``n = m**2`` grid points."""

    h0: float = 0.5
    beta: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.beta < 0.5:
            raise ValueError("beta must lie in (0, 1/2)")
        if self.h0 <= 0:
            raise ValueError("h0 must be positive")

    @classmethod
    def rate_optimal(cls, p: float, h0: float = 0.5) -> "BandwidthPolicy":
        """Balances smoothing bias against the boundary signal: ``beta = 1 / (2 (p + 1))``."""
        return cls(h0=h0, beta=1.0 / (2.0 * (p + 1.0)))

    def bandwidth(self, n: int) -> float:
        return self.h0 * float(n) ** (-self.beta)


GRID_MAX_CANDIDATES = 700


def auto_vertex_stride(m: int, h: float) -> int:
    """Vertex sublattice spacing for grid samples: about half a bandwidth in grid steps.

    The exact optimizer is cubic in the number of candidate vertices, which is
    infeasible on the full grid; spacing vertices ``h/2`` apart keeps the
    discretization well below the ``h`` scale of the estimation error.
    """
    return max(1, int(m * h / 2.0))


def _kernel_matrix(m: int, kernel: KernelSpec, h: float) -> np.ndarray:
    k = np.arange(m)
    return kernel.k0((k[:, None] - k[None, :]) / (m * h))


def kernel_estimate(data: GridData, kernel: KernelSpec, h: float) -> np.ndarray:
    """``mu_hat(x) = (1 / (n h^2)) sum_kl Y_kl K((x - x_kl) / h)`` at every grid point."""
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    A = _kernel_matrix(data.m, kernel, h)
    return A @ data.responses @ A.T / (data.n * h * h)


def interior_mask(m: int, h: float, L0: float = 1.0) -> np.ndarray:
    """Grid points in ``[L0 h, 1 - L0 h]^2``."""
    edge = L0 * h
    if edge >= 0.5:
        raise ValueError(f"interior region is empty: L0*h = {edge:.4g} >= 1/2")
    u = np.arange(1, m + 1) / m
    ok = (u >= edge) & (u <= 1.0 - edge)
    return ok[:, None] & ok[None, :]


def regression_statistic(data: GridData, kernel: KernelSpec, h: float) -> np.ndarray:
    """``sqrt(n h^2) * mu_hat`` on the grid (before subtracting the baseline)."""
    return np.sqrt(data.n) * h * kernel_estimate(data, kernel, h)


def regression_weights(data: GridData, kernel: KernelSpec, policy: BandwidthPolicy,
                       cfg: StumpConfig) -> WeightedSample:
    """Stump weights at the interior grid points; the criterion still divides by ``n = m^2``."""
    h = policy.bandwidth(data.n)
    mask = interior_mask(data.m, h, kernel.L0)
    mu_hat = kernel_estimate(data, kernel, h)
    stat = np.sqrt(data.n) * h * (mu_hat - cfg.tau_hat)
    kk, ll = np.nonzero(mask)
    pts = np.column_stack([(kk + 1) / data.m, (ll + 1) / data.m])
    return WeightedSample(
        pts,
        stump_weights(stat[kk, ll], cfg.gamma),
        gamma=cfg.gamma,
        n_total=data.n,
        tau_hat=cfg.tau_hat,
        m=data.m,
        lattice=Lattice(np.column_stack([kk, ll]), data.m),
    )
