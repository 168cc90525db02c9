"""Pipelines and studies behind the command line.

Every random draw is keyed by :func:`baselinezone.synth.seed_sequence`, so a
study gives identical numbers for any worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence, Union

import numpy as np
import numba
import scipy
import sklearn

from . import __version__
from .convex_dp import brute_force_oracle, estimate_set
from .criterion import DoseResponseData, StumpConfig, WeightedSample
from .geometry import ConvexPolygon
from .metrics import all_metrics, metric_d, metric_hausdorff
from .smoothing import BandwidthPolicy, GridData, KernelSpec
from .synth import GroundTruthScene, make_rng, sample_dose_response, sample_grid, seed_sequence
from .tau import search_options, tau_initial, tau_iterate, weighted_sample

Data = Union[DoseResponseData, GridData]
ORACLE_TOL = 1e-9
BOOKKEEPING_TOL = 1e-12


# estimation pipeline ------------------------------------------------------------

@dataclass
class EstimateConfig:
    """Everything that shapes one estimate besides the data."""

    tau_mode: str = "known"
    tau: float = 0.0
    gamma: float = 0.75
    delta_thin: float = 0.05
    max_iters: int = 5
    kernel: str = "epanechnikov"
    h0: float = 0.5
    beta: Optional[float] = None  # None: rate-optimal for p
    p: float = 1.0
    vertex_stride: Optional[int] = None
    max_candidates: Optional[int] = None

    def __post_init__(self):
        if self.tau_mode not in ("known", "init", "iterative"):
            raise ValueError(f"tau_mode must be known, init or iterative, got {self.tau_mode!r}")
        StumpConfig(self.tau, self.gamma)
        KernelSpec(self.kernel)
        self.policy()

    def policy(self) -> BandwidthPolicy:
        if self.beta is None:
            return BandwidthPolicy.rate_optimal(self.p, self.h0)
        return BandwidthPolicy(self.h0, self.beta)

    @classmethod
    def from_config(cls, cfg: dict) -> "EstimateConfig":
        """Build from flat string values; unrelated keys are ignored."""
        kw = {}
        for f in fields(cls):
            if f.name not in cfg:
                continue
            text = cfg[f.name]
            if f.name in ("tau_mode", "kernel"):
                kw[f.name] = text
            elif text in ("none", "auto"):
                kw[f.name] = None
            elif f.name in ("max_iters", "vertex_stride", "max_candidates"):
                kw[f.name] = int(text)
            else:
                kw[f.name] = float(text)
        return cls(**kw)


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    return h.hexdigest()[:16]


def data_digest(data: Data) -> str:
    if isinstance(data, DoseResponseData):
        return _digest(data.points, data.replicate_means, [data.m])
    return _digest(data.responses)


def scene_digest(scene: GroundTruthScene) -> str:
    text = json.dumps(scene.to_config(), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def versions() -> dict:
    return {"baselinezone": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__,
            "scikit-learn": sklearn.__version__}


def estimate(data: Data, cfg: EstimateConfig):
    """Weights, set estimate and (optionally) the baseline-level fit.

    Returns ``(tau_hat, tau_fit or None, OptimizerResult, WeightedSample)``.
    """
    kernel = KernelSpec(cfg.kernel)
    policy = cfg.policy()
    opts = search_options(data, policy, cfg.vertex_stride, cfg.max_candidates)
    fit = None
    if cfg.tau_mode == "iterative":
        fit, result = tau_iterate(data, StumpConfig(0.0, cfg.gamma), cfg.max_iters, cfg.delta_thin,
                                  kernel=kernel, policy=policy, **opts)
        tau = fit.tau_refined
        sample = weighted_sample(data, StumpConfig(tau, cfg.gamma), kernel, policy)
    else:
        tau = cfg.tau if cfg.tau_mode == "known" else tau_initial(data, kernel, policy)
        sample = weighted_sample(data, StumpConfig(tau, cfg.gamma), kernel, policy)
        result = estimate_set(sample, **opts)
    return tau, fit, result, sample


def estimate_report(data: Data, cfg: EstimateConfig,
                    scene: Optional[GroundTruthScene] = None, mc_points: int = 10**6,
                    seed: int = 0) -> dict:
    """Full pipeline as a JSON-ready dict.  Only ``wall_clock_s`` and ``elapsed_ms`` vary between runs."""
    t0 = time.perf_counter()
    tau, fit, result, _ = estimate(data, cfg)
    report = {
        "setting": "dose_response" if isinstance(data, DoseResponseData) else "regression",
        "data_digest": data_digest(data),
        "scene_digest": scene_digest(scene) if scene is not None else None,
        "config": asdict(cfg),
        "tau_hat": tau,
        "tau_fit": fit.to_dict() if fit is not None else None,
        "optimizer": result.to_dict(),
        "metrics": (all_metrics(result.polygon, scene, mc_points, seed).to_dict()
                    if scene is not None else None),
        "versions": versions(),
    }
    report["wall_clock_s"] = time.perf_counter() - t0
    return report


# oracle check -------------------------------------------------------------------

def oracle_instance(seed: int, index: int, n_lo: int, n_hi: int) -> WeightedSample:
    """Random instance ``index``; every fourth one sits on a coarse lattice to force
    collinear triples and duplicate points."""
    rng = make_rng(seed_sequence(seed, index))
    n = int(rng.integers(n_lo, n_hi + 1))
    if index % 4 == 3:
        pts = rng.integers(0, 4, size=(n, 2)) / 3.0
    else:
        pts = rng.random((n, 2))
    return WeightedSample(pts, rng.uniform(-1.0, 1.0, n))


def oracle_check(count: int = 200, n_lo: int = 4, n_hi: int = 12, seed: int = 0) -> dict:
    if not 3 <= n_lo <= n_hi <= 15:
        raise ValueError("n range must lie within [3, 15]")
    rows = []
    t0 = time.perf_counter()
    for i in range(count):
        s = oracle_instance(seed, i, n_lo, n_hi)
        dp = estimate_set(s)
        bf = brute_force_oracle(s)
        diff = abs(dp.criterion - bf.criterion)
        book = abs(dp.criterion - dp.internal_criterion)
        rows.append({"instance": i, "n": len(s), "dp": dp.criterion, "brute": bf.criterion,
                     "diff": diff, "bookkeeping_diff": book,
                     "ok": diff <= ORACLE_TOL and book <= BOOKKEEPING_TOL})
    return {"rows": rows, "passed": sum(r["ok"] for r in rows), "count": count,
            "all_ok": all(r["ok"] for r in rows), "elapsed_s": time.perf_counter() - t0}


# rate studies -------------------------------------------------------------------

@dataclass
class RateStudySpec:
    setting: str = "dose_response"
    p: float = 1.0
    budgets: Sequence[int] = (100, 200, 400, 800)  # n for dose response, m for regression
    replications: int = 50
    seed: int = 0
    tau_mode: str = "known"
    m0: float = 1.0
    beta: Optional[float] = None  # dose: m = m0 n^beta (4p/3); regression: bandwidth exponent
    h0: float = 0.5
    scene: GroundTruthScene = field(default_factory=GroundTruthScene)
    noiseless: bool = False  # add the sigma0 = 0 column
    delta_thin: float = 0.05
    max_iters: int = 5

    def __post_init__(self):
        if self.setting not in ("dose_response", "regression"):
            raise ValueError("setting must be dose_response or regression")
        if len(self.budgets) < 3:
            raise ValueError("a rate study needs at least 3 budgets")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        self.budgets = tuple(int(b) for b in self.budgets)

    def replicates_m(self, n: int) -> int:
        beta = 4.0 * self.p / 3.0 if self.beta is None else self.beta
        return max(1, int(round(self.m0 * n ** beta)))

    def estimate_config(self) -> EstimateConfig:
        beta = self.beta if self.setting == "regression" else None
        return EstimateConfig(tau_mode=self.tau_mode, tau=self.scene.tau0, h0=self.h0, beta=beta,
                              p=self.p, delta_thin=self.delta_thin, max_iters=self.max_iters)


def _one_replication(spec: RateStudySpec, b: int, r: int, noiseless: bool) -> dict:
    scene = spec.scene.with_(sigma0=0.0) if noiseless else spec.scene
    budget = spec.budgets[b]
    ss = seed_sequence(spec.seed, b, r)
    if spec.setting == "dose_response":
        m, n = spec.replicates_m(budget), budget
        data = sample_dose_response(scene, m, n, ss)
        n_total = n
    else:
        m = n = budget
        data = sample_grid(scene, budget, ss)
        n_total = budget * budget
    t0 = time.perf_counter()
    tau, fit, result, _ = estimate(data, spec.estimate_config())
    elapsed = time.perf_counter() - t0
    scale = math.sqrt(m * n) if spec.setting == "dose_response" else math.sqrt(n_total)
    return {"budget_index": b, "rep": r, "budget": budget, "m": m, "n": n, "n_total": n_total,
            "noiseless": noiseless, "d": metric_d(result.polygon, scene),
            "hausdorff": metric_hausdorff(result.polygon, scene), "tau_hat": tau,
            "tau_err_scaled": scale * abs(tau - scene.tau0), "elapsed_s": elapsed,
            "n_candidates": result.n_candidates, "vertex_stride": result.vertex_stride}


def _task(args):
    return _one_replication(*args)


def _slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def rate_study(spec: RateStudySpec, workers: int = 1, n_boot: int = 1000) -> dict:
    """Median ``d`` per budget and the least-squares slope of its log against log budget."""
    tasks = [(spec, b, r, nl) for nl in ([False, True] if spec.noiseless else [False])
             for b in range(len(spec.budgets)) for r in range(spec.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reps = list(pool.map(_task, tasks, chunksize=1))
    else:
        reps = [_task(t) for t in tasks]
    reps.sort(key=lambda d: (d["noiseless"], d["budget_index"], d["rep"]))

    def table(noiseless: bool):
        rows = []
        for b, budget in enumerate(spec.budgets):
            sel = [d for d in reps if d["budget_index"] == b and d["noiseless"] == noiseless]
            d = np.array([s["d"] for s in sel])
            q1, med, q3 = np.percentile(d, [25, 50, 75])
            rows.append({"budget": budget, "m": sel[0]["m"], "n": sel[0]["n"],
                         "n_total": sel[0]["n_total"], "replications": len(sel),
                         "median_d": float(med), "q25_d": float(q1), "q75_d": float(q3),
                         "iqr_d": float(q3 - q1),
                         "median_hausdorff": float(np.median([s["hausdorff"] for s in sel])),
                         "tau_err_scaled_p90": float(np.percentile(
                             [s["tau_err_scaled"] for s in sel], 90)),
                         "median_elapsed_s": float(np.median([s["elapsed_s"] for s in sel]))})
        return rows

    rows = table(False)
    x_key = "n" if spec.setting == "dose_response" else "n_total"
    x = np.array([r[x_key] for r in rows], dtype=float)
    slope = _slope(x, [r["median_d"] for r in rows])

    rng = make_rng(seed_sequence(spec.seed, 10**6))
    per_budget = [np.array([d["d"] for d in reps if d["budget_index"] == b and not d["noiseless"]])
                  for b in range(len(spec.budgets))]
    boots = np.empty(n_boot)
    for k in range(n_boot):
        meds = [np.median(rng.choice(v, size=len(v))) for v in per_budget]
        boots[k] = _slope(x, meds)
    out = {"setting": spec.setting, "x": x_key, "rows": rows, "slope": slope,
           "slope_ci95": [float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))],
           "replicates": reps}
    if spec.noiseless:
        out["noiseless_rows"] = table(True)
    return out


def timing_study(ns: Sequence[int] = (100, 200, 400, 800), seed: int = 0, repeats: int = 3) -> dict:
    """Wall-clock of :func:`estimate_set` when every point is a candidate vertex."""
    estimate_set(WeightedSample(np.random.default_rng(0).random((20, 2)), -np.ones(20)))  # compile
    rows = []
    for i, n in enumerate(ns):
        rng = make_rng(seed_sequence(seed, i))
        s = WeightedSample(rng.random((n, 2)), -rng.random(n))
        best = min(_timed(s) for _ in range(repeats))
        rows.append({"n": int(n), "seconds": best})
    expo = _slope([r["n"] for r in rows], [r["seconds"] for r in rows])
    return {"rows": rows, "exponent": expo}


def _timed(sample) -> float:
    t0 = time.perf_counter()
    estimate_set(sample)
    return time.perf_counter() - t0


# rendering ----------------------------------------------------------------------

def render_svg(sample: Optional[WeightedSample] = None, estimate_poly: Optional[ConvexPolygon] = None,
               scene: Optional[GroundTruthScene] = None, size: int = 600,
               max_points: int = 20000) -> str:
    """Points coloured by weight sign (blue negative, red positive), the estimate
    filled, and the true zone outlined."""
    def xy(p):
        return f"{p[0] * size:.2f},{(1.0 - p[1]) * size:.2f}"

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white" stroke="black"/>']
    if sample is not None and len(sample):
        step = max(1, int(math.ceil(len(sample) / max_points)))
        r = max(0.8, 0.25 * size / math.sqrt(len(sample)))
        for p, w in zip(sample.points[::step], sample.weights[::step]):
            color = "#1f5fbf" if w < 0 else "#c0392b"
            parts.append(f'<circle cx="{p[0] * size:.2f}" cy="{(1 - p[1]) * size:.2f}" '
                         f'r="{r:.2f}" fill="{color}" fill-opacity="0.6"/>')
    if estimate_poly is not None and not estimate_poly.is_empty:
        pts = " ".join(xy(v) for v in estimate_poly.vertices)
        parts.append(f'<polygon points="{pts}" fill="#2ecc71" fill-opacity="0.25" '
                     'stroke="#1e8449" stroke-width="2"/>')
    if scene is not None:
        pts = " ".join(xy(v) for v in scene.s0_polygon().vertices)
        parts.append(f'<polygon points="{pts}" fill="none" stroke="black" '
                     'stroke-width="1.5" stroke-dasharray="6,4"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
