"""Readers and writers for the on-disk formats.

CSV files start with one ``#`` comment line of ``key=value`` pairs; floats are
written with ``repr`` so every file round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .criterion import DoseResponseData, WeightedSample
from .geometry import ConvexPolygon, convex_hull
from .smoothing import GridData
from .synth import GroundTruthScene, SceneFormatError

PathLike = Union[str, Path]


class DataFormatError(ValueError):
    def __init__(self, message: str, path: Optional[PathLike] = None, line: Optional[int] = None):
        where = ":".join(str(p) for p in (path, line) if p is not None)
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line


def _num(v) -> str:
    return repr(float(v))


def _opt(v) -> str:
    return "none" if v is None else _num(v)


def _parse_opt(text: str) -> Optional[float]:
    return None if text == "none" else float(text)


def _header(meta: dict) -> str:
    return "# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n"


def _read_header(lines: list, path) -> dict:
    if not lines or not lines[0].startswith("#"):
        raise DataFormatError("missing '# key=value' header line", path, 1)
    meta = {}
    for tok in lines[0][1:].split():
        if "=" not in tok:
            raise DataFormatError(f"header token {tok!r} is not key=value", path, 1)
        k, v = tok.split("=", 1)
        meta[k] = v
    return meta


def _rows(lines: list, path, first_line: int, width: Optional[int] = None) -> np.ndarray:
    out = []
    for i, row in enumerate(csv.reader(lines), start=first_line):
        if not row:
            continue
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise DataFormatError(f"non-numeric value in {row!r}", path, i) from None
        if width is not None and len(vals) != width:
            raise DataFormatError(f"expected {width} columns, got {len(vals)}", path, i)
        if not all(np.isfinite(vals)):
            raise DataFormatError("non-finite value", path, i)
        out.append(vals)
    return np.array(out, dtype=float).reshape(len(out), -1)


def _lines(path: PathLike) -> list:
    try:
        return Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot read: {exc.strerror}", path) from None


def _expect_columns(lines: list, names: list, path) -> None:
    got = [c.strip() for c in lines[1].split(",")] if len(lines) > 1 else []
    if got != names:
        raise DataFormatError(f"expected columns {','.join(names)}, got {lines[1:2]}", path, 2)


# polygons -----------------------------------------------------------------------

def write_polygon(path: PathLike, poly: ConvexPolygon) -> None:
    Path(path).write_text(poly.to_json() + "\n")


def read_polygon(path: PathLike) -> ConvexPolygon:
    try:
        verts = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if not isinstance(verts, list) or not all(isinstance(v, list) and len(v) == 2 for v in verts):
        raise DataFormatError("polygon must be a JSON array of [x, y] pairs", path)
    return convex_hull(verts)


# weighted samples -----------------------------------------------------------------

def write_weighted_sample(path: PathLike, sample: WeightedSample) -> None:
    buf = io.StringIO()
    buf.write(_header({"gamma": _num(sample.gamma), "tau_hat": _opt(sample.tau_hat),
                       "m": "none" if sample.m is None else str(int(sample.m)),
                       "n_total": str(int(sample.n_total))}))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "weight"])
    for (x, y), wt in zip(sample.points, sample.weights):
        w.writerow([_num(x), _num(y), _num(wt)])
    Path(path).write_text(buf.getvalue())


def read_weighted_sample(path: PathLike) -> WeightedSample:
    lines = _lines(path)
    meta = _read_header(lines, path)
    _expect_columns(lines, ["x", "y", "weight"], path)
    arr = _rows(lines[2:], path, 3, width=3)
    try:
        m = meta.get("m", "none")
        return WeightedSample(
            arr[:, :2], arr[:, 2],
            gamma=float(meta.get("gamma", 0.75)),
            n_total=int(meta["n_total"]) if "n_total" in meta else None,
            tau_hat=_parse_opt(meta.get("tau_hat", "none")),
            m=None if m == "none" else int(m),
        )
    except ValueError as exc:
        raise DataFormatError(f"bad header value: {exc}", path, 1) from None


# dose-response data ---------------------------------------------------------------

def write_dose_response(path: PathLike, data: DoseResponseData) -> None:
    buf = io.StringIO()
    buf.write(_header({"setting": "dose_response", "m": str(data.m), "sigma0": _opt(data.sigma0)}))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "ybar"])
    for (x, y), yb in zip(data.points, data.replicate_means):
        w.writerow([_num(x), _num(y), _num(yb)])
    Path(path).write_text(buf.getvalue())


def read_dose_response(path: PathLike) -> DoseResponseData:
    lines = _lines(path)
    meta = _read_header(lines, path)
    _expect_columns(lines, ["x", "y", "ybar"], path)
    arr = _rows(lines[2:], path, 3, width=3)
    if len(arr) == 0:
        raise DataFormatError("no data rows", path)
    try:
        return DoseResponseData(arr[:, :2], arr[:, 2], int(meta["m"]),
                                sigma0=_parse_opt(meta.get("sigma0", "none")))
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"bad or missing header value: {exc}", path, 1) from None


# grid data ------------------------------------------------------------------------

def write_grid(path: PathLike, data: GridData) -> None:
    """Row ``k`` holds the responses at first coordinate ``k/m``."""
    buf = io.StringIO()
    buf.write(_header({"setting": "regression", "m": str(data.m), "sigma0": _opt(data.sigma0)}))
    w = csv.writer(buf, lineterminator="\n")
    for row in data.responses:
        w.writerow([_num(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_grid(path: PathLike) -> GridData:
    lines = _lines(path)
    meta = _read_header(lines, path)
    try:
        m = int(meta["m"])
    except (KeyError, ValueError):
        raise DataFormatError("header must record m", path, 1) from None
    arr = _rows(lines[1:], path, 2, width=m)
    if arr.shape != (m, m):
        raise DataFormatError(f"expected {m} rows of {m} values, got {arr.shape[0]} rows", path)
    return GridData(m, arr, sigma0=_parse_opt(meta.get("sigma0", "none")))


def read_data(path: PathLike) -> Union[DoseResponseData, GridData]:
    """Dispatch on the ``setting`` header key."""
    meta = _read_header(_lines(path)[:1], path)
    setting = meta.get("setting")
    if setting == "dose_response":
        return read_dose_response(path)
    if setting == "regression":
        return read_grid(path)
    raise DataFormatError(f"unknown setting {setting!r} in header", path, 1)


# flat key-value configs -----------------------------------------------------------

def parse_key_values(text: str, source: str = "<config>") -> dict:
    """``key = value`` lines; ``#`` starts a comment line; keys must be unique."""
    out = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SceneFormatError("expected 'key = value'", line=i, source=source)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise SceneFormatError("empty key", line=i, source=source)
        if key in out:
            raise SceneFormatError("duplicate key", line=i, key=key, source=source)
        out[key] = value
    return out


def key_lines(text: str) -> dict:
    """Line number of each key in ``key = value`` text."""
    out = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#") and "=" in line:
            out.setdefault(line.split("=", 1)[0].strip(), i)
    return out


def format_key_values(cfg: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.items())


def read_config(path: PathLike) -> dict:
    return parse_key_values(_config_text(path), str(path))


def _config_text(path: PathLike) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise SceneFormatError(f"cannot read: {exc.strerror}", source=str(path)) from None


def read_scene(path: PathLike) -> GroundTruthScene:
    text = _config_text(path)
    cfg = parse_key_values(text, str(path))
    try:
        return GroundTruthScene.from_config(cfg)
    except SceneFormatError as exc:
        line = key_lines(text).get(exc.key) if exc.key is not None else None
        raise SceneFormatError(exc.message, line=line, key=exc.key, source=str(path)) from None


def write_scene(path: PathLike, scene: GroundTruthScene) -> None:
    Path(path).write_text(format_key_values(scene.to_config()))
