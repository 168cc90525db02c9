"""Ground-truth scenes and seeded data generators.

Randomness is counter-based: every draw comes from
``SeedSequence(seed, spawn_key=key)`` where ``key`` names the unit of work
(for instance ``(budget_index, replication)``), so results do not depend on how
replications are scheduled across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from typing import Optional, Union

import numpy as np

from .criterion import DoseResponseData
from .geometry import (
    ConvexPolygon,
    contains,
    convex_hull,
    ellipse_polygon,
    linf_points_polygon,
    regular_polygon,
)
from .smoothing import GridData, grid_coordinates

POLYGON_SIDES = 512
ERROR_LAWS = ("gaussian", "exponential", "t5")

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    """The seed for unit of work ``key`` of a run seeded with ``seed``."""
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class Design:
    """Design distribution F on the unit square.

    ``table=None`` is uniform.  Otherwise ``table[i, j]`` is the relative
    density on the cell ``[i/a, (i+1)/a) x [j/b, (j+1)/b)`` of an ``a x b``
    partition (first index along the first coordinate).
    """

    def __init__(self, table=None):
        self.raw = None
        if table is None:
            self.table = None
            return
        t = np.array(table, dtype=float)
        if t.ndim != 2 or t.size == 0:
            raise ValueError("density table must be a non-empty matrix")
        if np.any(t <= 0) or not np.all(np.isfinite(t)):
            raise ValueError("density table entries must be positive and finite")
        self.raw = t  # kept verbatim so configs round-trip exactly
        self.table = t / t.mean()  # density values; integrates to 1

    @property
    def is_uniform(self) -> bool:
        return self.table is None

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        if self.table is None:
            return np.ones(len(x))
        a, b = self.table.shape
        i = np.clip((x[:, 0] * a).astype(int), 0, a - 1)
        j = np.clip((x[:, 1] * b).astype(int), 0, b - 1)
        return self.table[i, j]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random((n, 2))
        if self.table is None:
            return u
        a, b = self.table.shape
        prob = (self.table / self.table.sum()).ravel()
        cell = rng.choice(prob.size, size=n, p=prob)
        i, j = np.divmod(cell, b)
        return np.column_stack([(i + u[:, 0]) / a, (j + u[:, 1]) / b])

    def to_config(self) -> str:
        if self.table is None:
            return "uniform"
        return "grid:" + json.dumps(self.raw.tolist())

    @classmethod
    def from_config(cls, text: str) -> "Design":
        text = text.strip()
        if text == "uniform":
            return cls()
        if text.startswith("grid:"):
            return cls(json.loads(text[5:]))
        raise ValueError(f"design must be 'uniform' or 'grid:<json matrix>', got {text!r}")

    def __eq__(self, other):
        if not isinstance(other, Design):
            return NotImplemented
        if self.table is None or other.table is None:
            return self.table is None and other.table is None
        return self.raw.shape == other.raw.shape and bool(np.all(self.raw == other.raw))

    def __repr__(self):
        return f"Design({self.to_config()!r})"


def linf_distance_to_disc(x, center, radius: float) -> np.ndarray:
    """Exact l-infinity distance from points to a closed disc.

    The answer is the smallest ``t`` for which the square of half-side ``t``
    around ``x`` meets the disc.
    """
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    d = np.abs(x - np.asarray(center, dtype=float))
    a = d.max(axis=1)
    b = d.min(axis=1)
    edge = a - radius  # the square touches the disc with one face
    disc = radius * radius
    corner = 0.5 * ((a + b) - np.sqrt(np.maximum(2.0 * disc - (a - b) ** 2, 0.0)))
    t = np.where(a - radius >= b, edge, corner)
    t[a * a + b * b <= disc] = 0.0
    return np.maximum(t, 0.0)


@dataclass(frozen=True, eq=True)
class GroundTruthScene:
    """Baseline zone ``S0`` with the response surface built around it.

    ``mu = tau0 + C0 * rho**p`` for ``rho < kappa0`` (``rho`` the l-infinity
    distance to ``S0``), continued linearly with the slope at ``kappa0``.
    """

    shape: str = "disc"
    cx: float = 0.5
    cy: float = 0.5
    r: float = 0.25
    rx: Optional[float] = None
    ry: Optional[float] = None
    vertices: Optional[tuple] = None
    tau0: float = 0.0
    C0: float = 1.0
    p: float = 1.0
    kappa0: float = 0.1
    delta0: float = 0.1
    sigma0: float = 0.5
    eps0: float = 0.05
    error_law: str = "gaussian"
    design: Design = field(default_factory=Design)

    def __post_init__(self):
        if self.shape not in ("disc", "ellipse", "polygon"):
            raise ValueError(f"shape must be disc, ellipse or polygon, got {self.shape!r}")
        if self.shape == "disc" and not self.r > 0:
            raise ValueError("disc radius r must be positive")
        if self.shape == "ellipse" and not (self.rx and self.ry and self.rx > 0 and self.ry > 0):
            raise ValueError("ellipse needs positive rx and ry")
        if self.shape == "polygon":
            if self.vertices is None:
                raise ValueError("polygon shape needs vertices")
            object.__setattr__(self, "vertices",
                               tuple(tuple(float(c) for c in v) for v in self.vertices))
        for name in ("C0", "p", "kappa0", "delta0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma0 < 0:
            raise ValueError("sigma0 must be non-negative")
        if self.error_law not in ERROR_LAWS:
            raise ValueError(f"error_law must be one of {ERROR_LAWS}")
        if self.delta0 > self.C0 * self.kappa0 ** self.p:
            raise ValueError("delta0 exceeds C0*kappa0**p; separation would not hold")
        poly = self.s0_polygon()
        if poly.area <= 0:
            raise ValueError("S0 must have positive area")
        lo, hi = poly.vertices.min(axis=0), poly.vertices.max(axis=0)
        if lo.min() < self.eps0 or hi.max() > 1.0 - self.eps0:
            raise ValueError(f"S0 must lie inside [eps0, 1-eps0]^2 with eps0={self.eps0}")

    @cached_property
    def _polygon(self) -> ConvexPolygon:
        c = (self.cx, self.cy)
        if self.shape == "disc":
            return regular_polygon(c, self.r, POLYGON_SIDES)
        if self.shape == "ellipse":
            return ellipse_polygon(c, self.rx, self.ry, POLYGON_SIDES)
        return convex_hull(np.array(self.vertices))

    def s0_polygon(self) -> ConvexPolygon:
        """``S0`` itself when polygonal, else the inscribed 512-gon."""
        return self._polygon

    @property
    def s0_area(self) -> float:
        if self.shape == "disc":
            return math.pi * self.r ** 2
        if self.shape == "ellipse":
            return math.pi * self.rx * self.ry
        return self._polygon.area

    @property
    def polygon_error(self) -> float:
        """Area lost by polygonizing ``S0`` (zero for polygon scenes)."""
        return self.s0_area - self._polygon.area

    def distance(self, x) -> np.ndarray:
        """l-infinity distance to ``S0``; exact for discs and polygons."""
        if self.shape == "disc":
            return linf_distance_to_disc(x, (self.cx, self.cy), self.r)
        return linf_points_polygon(x, self._polygon)

    def in_s0(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        if self.shape == "disc":
            return np.hypot(x[:, 0] - self.cx, x[:, 1] - self.cy) <= self.r
        if self.shape == "ellipse":
            return ((x[:, 0] - self.cx) / self.rx) ** 2 + ((x[:, 1] - self.cy) / self.ry) ** 2 <= 1.0
        return contains(self._polygon, x)

    def mu(self, x) -> np.ndarray:
        rho = self.distance(x)
        near = self.C0 * np.minimum(rho, self.kappa0) ** self.p
        slope = self.C0 * self.p * self.kappa0 ** (self.p - 1.0)
        return self.tau0 + near + slope * np.maximum(rho - self.kappa0, 0.0)

    # flat key-value representation ------------------------------------------------

    def to_config(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name == "design":
                out[f.name] = v.to_config()
            elif f.name == "vertices":
                out[f.name] = json.dumps([list(p) for p in v])
            elif isinstance(v, str):
                out[f.name] = v
            else:
                out[f.name] = repr(float(v))
        return out

    @classmethod
    def from_config(cls, cfg: dict) -> "GroundTruthScene":
        known = {f.name for f in fields(cls)}
        kw = {}
        for key, text in cfg.items():
            if key not in known:
                raise SceneFormatError(f"unknown key {key!r}", key=key)
            try:
                if key == "design":
                    kw[key] = Design.from_config(text)
                elif key == "vertices":
                    kw[key] = json.loads(text)
                elif key in ("shape", "error_law"):
                    kw[key] = text
                else:
                    kw[key] = float(text)
            except ValueError as exc:
                raise SceneFormatError(f"bad value: {exc}", key=key) from None
        try:
            return cls(**kw)
        except ValueError as exc:
            raise SceneFormatError(str(exc)) from None

    def with_(self, **changes) -> "GroundTruthScene":
        return replace(self, **changes)


class SceneFormatError(ValueError):
    """Malformed scene or config text; carries the offending line and key when known."""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None,
                 source: Optional[str] = None):
        where = [] if source is None else [source]
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.message = message
        self.line = line
        self.key = key
        self.source = source


def _standard_errors(law: str, size, rng: np.random.Generator) -> np.ndarray:
    """Mean-zero, unit-variance errors."""
    if law == "gaussian":
        return rng.standard_normal(size)
    if law == "exponential":
        return rng.standard_exponential(size) - 1.0
    if law == "t5":
        return rng.standard_t(5, size) * math.sqrt(3.0 / 5.0)
    raise ValueError(f"unknown error law {law!r}")


def sample_dose_response(scene: GroundTruthScene, m: int, n: int, seed: SeedLike,
                         full_replicates: bool = False) -> DoseResponseData:
    """``n`` design points with the mean of ``m`` replicate responses at each.

    Gaussian means are drawn directly as ``mu + sigma0/sqrt(m) * Z``; other error
    laws (or ``full_replicates=True``) average ``m`` explicit draws.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    rng = make_rng(seed)
    x = scene.design.sample(n, rng)
    mu = scene.mu(x)
    if scene.sigma0 == 0:
        ybar = mu
    elif scene.error_law == "gaussian" and not full_replicates:
        ybar = mu + scene.sigma0 / math.sqrt(m) * rng.standard_normal(n)
    else:
        ybar = mu + scene.sigma0 * _standard_errors(scene.error_law, (n, m), rng).mean(axis=1)
    return DoseResponseData(x, ybar, m, sigma0=scene.sigma0)


def sample_grid(scene: GroundTruthScene, m: int, seed: SeedLike) -> GridData:
    if m < 2:
        raise ValueError("grid side m must be at least 2")
    rng = make_rng(seed)
    mu = scene.mu(grid_coordinates(m)).reshape(m, m)
    if scene.sigma0 > 0:
        mu = mu + scene.sigma0 * _standard_errors(scene.error_law, (m, m), rng)
    return GridData(m, mu, sigma0=scene.sigma0)


def perturbed_polygon(scene: GroundTruthScene, rng: np.random.Generator, k: int = 24,
                      scale: float = 0.1) -> ConvexPolygon:
    """Random convex set near ``S0``: hull of boundary points pushed radially by up to ``scale``."""
    base = scene.s0_polygon().vertices
    c = scene.s0_polygon().centroid()
    idx = rng.choice(len(base), size=k, replace=False)
    pts = base[idx]
    factor = 1.0 + rng.uniform(-scale, scale, size=(k, 1)) / np.maximum(
        np.linalg.norm(pts - c, axis=1, keepdims=True), 1e-12)
    shift = rng.uniform(-scale, scale, size=2) * 0.5
    out = c + (pts - c) * factor + shift
    return convex_hull(np.clip(out, 0.0, 1.0))


__all__ = [
    "Design",
    "GroundTruthScene",
    "SceneFormatError",
    "linf_distance_to_disc",
    "make_rng",
    "perturbed_polygon",
    "sample_dose_response",
    "sample_grid",
    "seed_sequence",
]
