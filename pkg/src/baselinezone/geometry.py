"""Planar primitives on convex polygons.

Polygons are immutable and stored as ``(k, 2)`` float arrays in counterclockwise
order, starting at the lexicographically smallest vertex.  Degenerate polygons
(empty, a single point, a segment) are valid values with zero area.

Distances that stand in for the set metric use the l-infinity norm.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

import numpy as np

EPS_GEOM = 1e-12

POSITIVE = 1
ZERO = 0
NEGATIVE = -1


def cross(a, b, c) -> float:
    """Signed doubled area of the triangle ``a, b, c``."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def orientation(a, b, c, eps: float = EPS_GEOM) -> int:
    """Sign of the turn ``a -> b -> c``: +1 counterclockwise, 0 collinear, -1 clockwise."""
    d = cross(a, b, c)
    if d > eps:
        return POSITIVE
    if d < -eps:
        return NEGATIVE
    return ZERO


class ConvexPolygon:
    """A closed convex polygon, possibly degenerate.

    Build from arbitrary points with :func:`convex_hull` or from vertices that are
    already convex with :meth:`from_vertices`; both normalize the vertex list.
    """

    __slots__ = ("_v",)

    def __init__(self, vertices=None):
        if vertices is None:
            v = np.empty((0, 2))
        else:
            v = np.array(vertices, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon vertices must be finite")
        v.setflags(write=False)
        self._v = v

    @classmethod
    def from_vertices(cls, vertices) -> "ConvexPolygon":
        return convex_hull(vertices)

    @classmethod
    def box(cls, x0: float, y0: float, x1: float, y1: float) -> "ConvexPolygon":
        return cls([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    @property
    def vertices(self) -> np.ndarray:
        return self._v

    def __len__(self) -> int:
        return len(self._v)

    @property
    def is_empty(self) -> bool:
        return len(self._v) == 0

    @property
    def area(self) -> float:
        v = self._v
        if len(v) < 3:
            return 0.0
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    @property
    def perimeter(self) -> float:
        v = self._v
        if len(v) < 2:
            return 0.0
        if len(v) == 2:
            return 2.0 * float(np.hypot(*(v[1] - v[0])))
        return float(np.hypot(*(np.roll(v, -1, axis=0) - v).T).sum())

    def centroid(self) -> np.ndarray:
        v = self._v
        if len(v) == 0:
            raise ValueError("empty polygon has no centroid")
        if len(v) < 3:
            return v.mean(axis=0)
        x, y = v[:, 0], v[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        c = x * yn - xn * y
        a = c.sum() / 2.0
        return np.array([((x + xn) * c).sum(), ((y + yn) * c).sum()]) / (6.0 * a)

    def contains(self, q, eps: float = EPS_GEOM):
        return contains(self, q, eps)

    def to_list(self) -> list:
        return [[float(x), float(y)] for x, y in self._v]

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> "ConvexPolygon":
        return convex_hull(json.loads(text))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConvexPolygon):
            return NotImplemented
        return self._v.shape == other._v.shape and bool(np.all(self._v == other._v))

    def __hash__(self) -> int:
        return hash(self._v.tobytes())

    def __repr__(self) -> str:
        return f"ConvexPolygon({self.to_list()!r})"


def convex_hull(points: Iterable[Sequence[float]], eps: float = EPS_GEOM) -> ConvexPolygon:
    """Monotone-chain hull; collinear boundary points are dropped.

    The result is independent of the input order.
    """
    pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
    if pts.size == 0:
        return ConvexPolygon()
    pts = pts.reshape(-1, 2)
    pts = np.unique(pts, axis=0)  # sorted lexicographically
    if len(pts) == 1:
        return ConvexPolygon(pts)

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2 and cross(chain[-2], chain[-1], p) <= eps:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:
        return ConvexPolygon([pts[0], pts[-1]])
    if len(hull) == 2 and np.all(hull[0] == hull[1]):
        return ConvexPolygon(hull[:1])
    return ConvexPolygon(np.array(hull))


def contains(poly: ConvexPolygon, q, eps: float = EPS_GEOM):
    """Closed-set membership test.  ``q`` may be one point or an ``(n, 2)`` array."""
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    q = q.reshape(-1, 2)
    v = poly.vertices
    k = len(v)
    if k == 0:
        out = np.zeros(len(q), dtype=bool)
    elif k == 1:
        out = np.all(np.abs(q - v[0]) <= eps, axis=1)
    elif k == 2:
        a, b = v
        d = b - a
        cr = d[0] * (q[:, 1] - a[1]) - d[1] * (q[:, 0] - a[0])
        t = (q - a) @ d
        out = (np.abs(cr) <= eps) & (t >= -eps) & (t <= d @ d + eps)
    else:
        out = np.ones(len(q), dtype=bool)
        for i in range(k):
            a, b = v[i], v[(i + 1) % k]
            cr = (b[0] - a[0]) * (q[:, 1] - a[1]) - (b[1] - a[1]) * (q[:, 0] - a[0])
            out &= cr >= -eps
    return bool(out[0]) if single else out


def _clip(subject: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Keep the part of ``subject`` on the left of the directed line ``a -> b``."""
    if len(subject) == 0:
        return subject
    out = []
    n = len(subject)
    for i in range(n):
        p, q = subject[i], subject[(i + 1) % n]
        cp, cq = cross(a, b, p), cross(a, b, q)
        if cp >= 0:
            out.append(p)
        if (cp >= 0) != (cq >= 0):
            t = cp / (cp - cq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def intersection(p1: ConvexPolygon, p2: ConvexPolygon) -> ConvexPolygon:
    """Intersection of two convex polygons with positive area (Sutherland-Hodgman).

    Degenerate inputs produce an empty result; only areas are needed downstream.
    """
    if len(p1) < 3 or len(p2) < 3:
        return ConvexPolygon()
    sub = p1.vertices.copy()
    c = p2.vertices
    for i in range(len(c)):
        sub = _clip(sub, c[i], c[(i + 1) % len(c)])
        if len(sub) == 0:
            return ConvexPolygon()
    return convex_hull(sub)


def intersection_area(p1: ConvexPolygon, p2: ConvexPolygon) -> float:
    a = intersection(p1, p2).area
    return min(max(a, 0.0), p1.area, p2.area)


def symmetric_difference_area(p1: ConvexPolygon, p2: ConvexPolygon) -> float:
    return max(p1.area + p2.area - 2.0 * intersection_area(p1, p2), 0.0)


_CORNERS = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])


def fatten(poly: ConvexPolygon, delta: float) -> ConvexPolygon:
    """Outward l-infinity offset: the Minkowski sum with the square of half-side ``delta``."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta == 0 or poly.is_empty:
        return poly
    pts = (poly.vertices[:, None, :] + delta * _CORNERS[None, :, :]).reshape(-1, 2)
    return convex_hull(pts)


def thin(poly: ConvexPolygon, delta: float) -> ConvexPolygon:
    """Inward l-infinity offset: points whose ``delta``-square lies inside ``poly``.

    For a convex set this is the intersection of the four corner translates.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta == 0:
        return poly
    if len(poly) < 3:
        return ConvexPolygon()
    out = poly
    for c in _CORNERS:
        out = intersection(out, ConvexPolygon(poly.vertices - delta * c))
        if out.is_empty:
            break
    return out


def fatten_thin(poly: ConvexPolygon, delta: float) -> tuple[ConvexPolygon, ConvexPolygon]:
    return fatten(poly, delta), thin(poly, delta)


def linf_point_segment(p, a, b) -> float:
    """Exact l-infinity distance from ``p`` to the closed segment ``[a, b]``."""
    p, a, b = (np.asarray(z, dtype=float) for z in (p, a, b))
    d = b - a
    r = p - a
    ts = [0.0, 1.0]
    # max(|r - t d|) is convex piecewise linear in t; kinks where the two
    # coordinates tie or where one of them vanishes.  Huge t from tiny
    # denominators are clipped below.
    with np.errstate(over="ignore"):
        for s in (1.0, -1.0):
            den = d[0] - s * d[1]
            if den != 0.0:
                ts.append((r[0] - s * r[1]) / den)
        for k in (0, 1):
            if d[k] != 0.0:
                ts.append(r[k] / d[k])
    best = math.inf
    for t in ts:
        t = min(max(t, 0.0), 1.0)
        e = r - t * d
        best = min(best, max(abs(e[0]), abs(e[1])))
    return best


def linf_point_polygon(p, poly: ConvexPolygon) -> float:
    """l-infinity distance from a point to a closed convex polygon (0 inside)."""
    v = poly.vertices
    if len(v) == 0:
        raise ValueError("distance to an empty polygon is undefined")
    if len(v) == 1:
        return float(np.max(np.abs(np.asarray(p, float) - v[0])))
    if len(v) >= 3 and contains(poly, p):
        return 0.0
    k = len(v)
    edges = range(k) if k >= 3 else range(1)
    return min(linf_point_segment(p, v[i], v[(i + 1) % k]) for i in edges)


def linf_points_segment(p, a, b) -> np.ndarray:
    """Vectorized :func:`linf_point_segment` over an ``(n, 2)`` array of points."""
    p = np.asarray(p, dtype=float).reshape(-1, 2)
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    r = p - a
    ts = [np.zeros(len(p)), np.ones(len(p))]
    with np.errstate(over="ignore"):
        for s in (1.0, -1.0):
            den = d[0] - s * d[1]
            if den != 0.0:
                ts.append((r[:, 0] - s * r[:, 1]) / den)
        for k in (0, 1):
            if d[k] != 0.0:
                ts.append(r[:, k] / d[k])
    t = np.clip(np.stack(ts), 0.0, 1.0)[..., None]
    e = r[None, :, :] - t * d
    return np.abs(e).max(axis=2).min(axis=0)


def linf_points_polygon(p, poly: ConvexPolygon, chunk: int = 8192) -> np.ndarray:
    """Vectorized :func:`linf_point_polygon`.

    For a proper polygon, ``P + t*square`` is cut out by the edge normals of
    ``P`` and the four axis normals, so the distance is the largest support gap
    ``(n.p - h_P(n)) / |n|_1`` over those normals.
    """
    p = np.asarray(p, dtype=float).reshape(-1, 2)
    v = poly.vertices
    if len(v) == 0:
        raise ValueError("distance to an empty polygon is undefined")
    if len(v) == 1:
        return np.abs(p - v[0]).max(axis=1)
    if len(v) == 2:
        return linf_points_segment(p, v[0], v[1])
    d = np.roll(v, -1, axis=0) - v
    normals = np.vstack([np.column_stack([d[:, 1], -d[:, 0]]), np.eye(2), -np.eye(2)])
    support = np.r_[np.einsum("ij,ij->i", normals[:len(v)], v),
                    v.max(axis=0), -v.min(axis=0)]
    scale = np.abs(normals).sum(axis=1)
    out = np.empty(len(p))
    for k in range(0, len(p), chunk):
        gap = (p[k:k + chunk] @ normals.T - support) / scale
        out[k:k + chunk] = np.maximum(gap.max(axis=1), 0.0)
    out[contains(poly, p)] = 0.0  # boundary points would otherwise carry rounding noise
    return out


def directed_hausdorff(p1: ConvexPolygon, p2: ConvexPolygon) -> float:
    # distance to a convex set is a convex function, so its max over p1 sits at a vertex
    return float(linf_points_polygon(p1.vertices, p2).max())


def hausdorff_distance(p1: ConvexPolygon, p2: ConvexPolygon) -> float:
    """l-infinity Hausdorff distance between two non-empty convex polygons."""
    if p1.is_empty or p2.is_empty:
        raise ValueError("Hausdorff distance needs two non-empty polygons")
    return max(directed_hausdorff(p1, p2), directed_hausdorff(p2, p1))


def regular_polygon(center, radius: float, k: int = 512) -> ConvexPolygon:
    """Inscribed regular ``k``-gon of a disc."""
    t = 2.0 * np.pi * np.arange(k) / k
    c = np.asarray(center, dtype=float)
    return convex_hull(np.column_stack([c[0] + radius * np.cos(t), c[1] + radius * np.sin(t)]))


def ellipse_polygon(center, rx: float, ry: float, k: int = 512) -> ConvexPolygon:
    t = 2.0 * np.pi * np.arange(k) / k
    c = np.asarray(center, dtype=float)
    return convex_hull(np.column_stack([c[0] + rx * np.cos(t), c[1] + ry * np.sin(t)]))
