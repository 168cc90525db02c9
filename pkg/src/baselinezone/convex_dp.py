"""Exact minimization of the weighted criterion over closed convex sets.

The minimizer can be taken to be the convex hull of the data points it contains,
so the search runs over convex polygons with vertices at data points.  For each
choice of leftmost vertex the polygon is grown as a fan of triangles around it
and a dynamic program over consecutive vertex pairs finds the best fan; the best
over all leftmost vertices (and the empty set) is the estimate.

Vertices are restricted to points of negative (merged) weight: removing a
vertex of positive weight from an optimal polygon removes exactly that point, so
such a vertex can never be part of a minimizer.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .criterion import WeightedSample, criterion_value
from .geometry import EPS_GEOM, ConvexPolygon, contains, convex_hull

TIE_TOL = 1e-12


@dataclass
class OptimizerResult:
    polygon: ConvexPolygon
    included: np.ndarray  # sorted original indices inside or on the polygon
    criterion: float  # recomputed by point-in-polygon
    internal_criterion: float  # the optimizer's own running sum
    base_vertex: int = -1
    vertex_chain: list = field(default_factory=list)
    elapsed_ms: float = 0.0
    ops: int = 0
    n_candidates: int = 0
    vertex_stride: int = 1

    @property
    def included_count(self) -> int:
        return int(len(self.included))

    def to_dict(self) -> dict:
        return {
            "vertices": self.polygon.to_list(),
            "criterion": self.criterion,
            "internal_criterion": self.internal_criterion,
            "base_index": int(self.base_vertex),
            "vertex_chain": [int(i) for i in self.vertex_chain],
            "included_count": self.included_count,
            "elapsed_ms": self.elapsed_ms,
            "ops": int(self.ops),
            "n_candidates": int(self.n_candidates),
            "vertex_stride": int(self.vertex_stride),
        }


def _merge_duplicates(points: np.ndarray, weights: np.ndarray):
    uniq, inverse = np.unique(points, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    w = np.bincount(inverse, weights=weights, minlength=len(uniq))
    cnt = np.bincount(inverse, minlength=len(uniq)).astype(np.int64)
    # representative original index: the smallest one at each location
    rep = np.full(len(uniq), len(points), dtype=np.int64)
    np.minimum.at(rep, inverse, np.arange(len(points)))
    return uniq, w, cnt, rep


def _finish(sample, val, kind, chain, cand_orig_idx, coords, t0, ops, ncand):
    if kind == _kernels.KIND_EMPTY:
        poly = ConvexPolygon()
        base = -1
        chain_idx = []
    else:
        poly = convex_hull(coords[chain])
        base = int(cand_orig_idx[chain[0]])
        chain_idx = [int(cand_orig_idx[c]) for c in chain]
    included = np.flatnonzero(contains(poly, sample.points)) if not poly.is_empty else np.empty(0, int)
    return OptimizerResult(
        polygon=poly,
        included=included,
        criterion=criterion_value(sample, poly),
        internal_criterion=float(val) / sample.n_total if kind != _kernels.KIND_EMPTY else 0.0,
        base_vertex=base,
        vertex_chain=chain_idx,
        elapsed_ms=1e3 * (time.perf_counter() - t0),
        ops=int(ops),
        n_candidates=int(ncand),
    )


def _run(sample: WeightedSample, base_point=None, vertex_stride: int = 1,
         max_candidates: Optional[int] = None):
    t0 = time.perf_counter()
    if sample.lattice is not None:
        return _run_lattice(sample, base_point, vertex_stride, max_candidates, t0)
    if vertex_stride != 1:
        raise ValueError("vertex_stride needs lattice-structured samples")
    pts, w, cnt, rep = _merge_duplicates(sample.points, sample.weights)
    cand_mask = w < 0
    base_c = -1
    if base_point is not None:
        bi = int(np.flatnonzero(np.all(pts == base_point, axis=1))[0])
        cand_mask[bi] = True
        base_c = int(np.count_nonzero(cand_mask[:bi]))
    cand = np.flatnonzero(cand_mask).astype(np.int64)
    if len(cand) == 0:
        return _finish(sample, 0.0, _kernels.KIND_EMPTY, None, None, None, t0, 0, 0)
    px = np.ascontiguousarray(pts[:, 0])
    py = np.ascontiguousarray(pts[:, 1])
    bw, bc, ow, oc, ops1 = _kernels.pair_tables_generic(px, py, w, cand, EPS_GEOM)
    tab = _kernels.pack_tables(bw, bc, ow, oc)
    val, _, kind, _, chain, ops2 = _kernels.fan_dp(
        px[cand], py[cand], w[cand], cnt[cand].astype(float), tab, EPS_GEOM, TIE_TOL, base_c
    )
    return _finish(sample, val, kind, chain, rep[cand], pts[cand], t0, ops1 + ops2, len(cand))


def _run_lattice(sample: WeightedSample, base_point, stride: int, max_candidates, t0):
    lat = sample.lattice
    m = lat.m
    idx = np.asarray(lat.index, dtype=np.int64)
    gw = np.zeros((m, m))
    gc = np.zeros((m, m), dtype=np.int64)
    np.add.at(gw, (idx[:, 0], idx[:, 1]), sample.weights)
    np.add.at(gc, (idx[:, 0], idx[:, 1]), 1)
    first = np.full((m, m), -1, dtype=np.int64)
    first[idx[::-1, 0], idx[::-1, 1]] = np.arange(len(idx))[::-1]

    negative = (gw < 0) & (gc > 0)
    while True:
        cand_mask = negative.copy()
        if stride > 1:
            on_sub = np.zeros((m, m), dtype=bool)
            on_sub[::stride, ::stride] = True
            cand_mask &= on_sub
        if max_candidates is None or np.count_nonzero(cand_mask) <= max_candidates:
            break
        stride += 1
    base_c = -1
    if base_point is not None:
        bk, bl = (int(v) for v in base_point)
        cand_mask[bk, bl] = True
    ck, cl = np.nonzero(cand_mask)  # row-major order is lex order on (k, l)
    if base_point is not None:
        base_c = int(np.flatnonzero((ck == bk) & (cl == bl))[0])
    if len(ck) == 0:
        return _finish(sample, 0.0, _kernels.KIND_EMPTY, None, None, None, t0, 0, 0)
    ck = ck.astype(np.int64)
    cl = cl.astype(np.int64)
    bw, bc, ow, oc, ops1 = _kernels.pair_tables_lattice(ck, cl, gw, gc)
    tab = _kernels.pack_tables(bw, bc, ow, oc)
    val, _, kind, _, chain, ops2 = _kernels.fan_dp(
        ck.astype(float), cl.astype(float), gw[ck, cl], gc[ck, cl].astype(float), tab,
        EPS_GEOM, TIE_TOL, base_c,
    )
    orig = first[ck, cl]
    coords = sample.points[orig]
    out = _finish(sample, val, kind, chain, orig, coords, t0, ops1 + ops2, len(ck))
    out.vertex_stride = stride
    return out


def estimate_set(sample: WeightedSample, vertex_stride: int = 1,
                 max_candidates: Optional[int] = None) -> OptimizerResult:
    """Minimize the criterion over closed convex sets.

    ``vertex_stride > 1`` (lattice samples only) restricts vertices to every
    ``stride``-th grid row and column; all points are still counted exactly, so the
    result is the exact minimizer over that coarser polygon class.
    ``max_candidates`` (lattice samples only) widens the stride further until at
    most that many candidate vertices remain.
    """
    if len(sample) == 0:
        raise ValueError("empty sample")
    if vertex_stride < 1:
        raise ValueError("vertex_stride must be a positive integer")
    if max_candidates is not None and sample.lattice is None:
        raise ValueError("max_candidates needs a lattice-structured sample")
    return _run(sample, vertex_stride=vertex_stride, max_candidates=max_candidates)


def optimize_fan(sample: WeightedSample, base: int) -> OptimizerResult:
    """Best polygon whose leftmost vertex is sample point ``base``."""
    if sample.lattice is not None:
        return _run(sample, base_point=sample.lattice.index[base])
    return _run(sample, base_point=sample.points[base])


def triangle_measure(sample: WeightedSample, base: int, i: int, j: int,
                     eps: float = EPS_GEOM) -> float:
    """Criterion mass of the closed triangle ``(base, i, j)`` minus the closed segment ``[base, i]``."""
    p = sample.points
    b, a, c = p[base], p[i], p[j]
    d = (a[0] - b[0]) * (c[1] - b[1]) - (a[1] - b[1]) * (c[0] - b[0])
    if d < -eps:
        raise ValueError("triangle (base, i, j) is clockwise")
    tri = convex_hull([b, a, c])
    seg = convex_hull([b, a])
    mask = contains(tri, p, eps) & ~contains(seg, p, eps)
    return float(sample.weights[mask].sum()) / sample.n_total


def brute_force_oracle(sample: WeightedSample, max_n: int = 15) -> OptimizerResult:
    """Enumerate every subset's hull; exact but exponential."""
    n = len(sample)
    if n > max_n:
        raise ValueError(f"brute force refuses n={n} > max_n={max_n}")
    t0 = time.perf_counter()
    pts = sample.points
    best = (0.0, 0, ())
    best_poly = ConvexPolygon()
    seen = set()
    for r in range(1, n + 1):
        for sub in itertools.combinations(range(n), r):
            poly = convex_hull(pts[list(sub)])
            key = poly.vertices.tobytes()
            if key in seen:
                continue
            seen.add(key)
            inside = contains(poly, pts)
            inc = tuple(np.flatnonzero(inside))
            val = float(sample.weights[inside].sum())
            cand = (val, len(inc), inc)
            if val < best[0] - TIE_TOL or (abs(val - best[0]) <= TIE_TOL and cand[1:] < best[1:]):
                best = cand
                best_poly = poly
    return OptimizerResult(
        polygon=best_poly,
        included=np.array(best[2], dtype=int),
        criterion=criterion_value(sample, best_poly),
        internal_criterion=best[0] / sample.n_total,
        elapsed_ms=1e3 * (time.perf_counter() - t0),
    )
