"""Artifact serialization: PGM images, raw spectra, CSV tables.

EPIs and spectra are written as 16-bit binary PGM (maxval 65535,
big-endian samples per the format) with the value scaling recorded in a
plain-text sidecar, so the geometry metadata round-trips losslessly even
though the image itself is quantized. Spectra additionally get an exact
raw float64 dump next to the viewable graymap. Tables are plain CSV with
full-precision reprs.
"""

from __future__ import annotations

import configparser
import csv
from pathlib import Path

import numpy as np

from .experiments import LayersResult, SamplingCurve, SweepResult
from .mapping import PlaneParam
from .render import Epi
from .spectral import SpectrumGrid

__all__ = [
    "write_epi",
    "read_epi",
    "read_pgm16",
    "write_spectrum",
    "read_spectrum",
    "write_sweep_csv",
    "read_sweep_csv",
    "write_curve_csv",
    "write_layers_rmse_csv",
    "write_heatmap_pgm",
]


def _write_pgm16(values01: np.ndarray, path: Path) -> None:
    # P5 with maxval 65535: two bytes per sample, most significant first
    quantized = np.round(np.clip(values01, 0.0, 1.0) * 65535.0).astype(">u2")
    height, width = quantized.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n65535\n".encode("ascii"))
        fh.write(quantized.tobytes())


def read_pgm16(path) -> np.ndarray:
    """Read a binary 16-bit PGM written by this module; returns uint16."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise ValueError(f"{path}: not a binary PGM")
        dims = fh.readline().split()
        width, height = int(dims[0]), int(dims[1])
        maxval = int(fh.readline())
        if maxval != 65535:
            raise ValueError(f"{path}: expected 16-bit samples, got maxval {maxval}")
        raw = fh.read(width * height * 2)
    return np.frombuffer(raw, dtype=">u2").reshape(height, width).astype(np.uint16)


def _format_float(x: float) -> str:
    return repr(float(x))


def _param_section(param: PlaneParam) -> dict[str, str]:
    return {
        "focal": _format_float(param.focal),
        "depth": _format_float(param.depth),
        "tilt_deg": _format_float(param.tilt_deg),
        "s_max": _format_float(param.s_max),
        "u_max": _format_float(param.u_max),
    }


def _param_from_section(sec) -> PlaneParam:
    return PlaneParam(
        focal=float(sec["focal"]),
        depth=float(sec["depth"]),
        tilt_deg=float(sec["tilt_deg"]),
        s_max=float(sec["s_max"]),
        u_max=float(sec["u_max"]),
        check=False,
    )


def write_epi(epi: Epi, stem) -> tuple[Path, Path]:
    """Write <stem>.pgm (quantized view) and <stem>.meta (lossless sidecar)."""
    stem = Path(stem)
    scale = float(epi.data.max())
    view = epi.data / scale if scale > 0.0 else np.zeros_like(epi.data)
    pgm_path = stem.with_suffix(".pgm")
    _write_pgm16(view, pgm_path)
    meta = configparser.ConfigParser()
    meta["epi"] = {
        "scene_id": epi.scene_id,
        "n_s": str(epi.n_s),
        "n_u": str(epi.n_u),
        "scale_max": _format_float(scale),
        "s_first": _format_float(epi.s_axis[0]),
        "s_last": _format_float(epi.s_axis[-1]),
        "u_first": _format_float(epi.u_axis[0]),
        "u_last": _format_float(epi.u_axis[-1]),
    }
    meta["param"] = _param_section(epi.param)
    meta_path = stem.with_suffix(".meta")
    with open(meta_path, "w") as fh:
        meta.write(fh)
    return pgm_path, meta_path


def read_epi(stem) -> Epi:
    """Sidecar metadata exactly, pixel values up to 16-bit quantization."""
    stem = Path(stem)
    meta = configparser.ConfigParser()
    with open(stem.with_suffix(".meta")) as fh:
        meta.read_file(fh)
    sec = meta["epi"]
    n_s, n_u = int(sec["n_s"]), int(sec["n_u"])
    scale = float(sec["scale_max"])
    data = read_pgm16(stem.with_suffix(".pgm")).astype(float) / 65535.0 * scale
    s_axis = np.linspace(float(sec["s_first"]), float(sec["s_last"]), n_s)
    u_axis = np.linspace(float(sec["u_first"]), float(sec["u_last"]), n_u)
    return Epi(data, s_axis, u_axis, _param_from_section(meta["param"]), sec["scene_id"])


def write_spectrum(spectrum: SpectrumGrid, stem) -> tuple[Path, Path, Path]:
    """Write <stem>.pgm (log view), <stem>.f64 (exact) and <stem>.hdr.

    The .f64 file is the flat row-major magnitude array as little-endian
    float64; the header records shape and frequency axes.
    """
    stem = Path(stem)
    log_view = np.log1p(spectrum.mag)
    peak = float(log_view.max())
    pgm_path = stem.with_suffix(".pgm")
    _write_pgm16(log_view / peak if peak > 0.0 else log_view, pgm_path)
    raw_path = stem.with_suffix(".f64")
    spectrum.mag.astype("<f8").tofile(raw_path)
    hdr = configparser.ConfigParser()
    hdr["spectrum"] = {
        "n_s": str(spectrum.mag.shape[0]),
        "n_u": str(spectrum.mag.shape[1]),
        "dtype": "float64",
        "byte_order": "little",
        "layout": "row-major",
        "ws_first": _format_float(spectrum.ws_axis[0]),
        "ws_last": _format_float(spectrum.ws_axis[-1]),
        "wu_first": _format_float(spectrum.wu_axis[0]),
        "wu_last": _format_float(spectrum.wu_axis[-1]),
    }
    hdr_path = stem.with_suffix(".hdr")
    with open(hdr_path, "w") as fh:
        hdr.write(fh)
    return pgm_path, raw_path, hdr_path


def read_spectrum(stem) -> SpectrumGrid:
    stem = Path(stem)
    hdr = configparser.ConfigParser()
    with open(stem.with_suffix(".hdr")) as fh:
        hdr.read_file(fh)
    sec = hdr["spectrum"]
    n_s, n_u = int(sec["n_s"]), int(sec["n_u"])
    mag = np.fromfile(stem.with_suffix(".f64"), dtype="<f8").reshape(n_s, n_u)
    ws = np.linspace(float(sec["ws_first"]), float(sec["ws_last"]), n_s)
    wu = np.linspace(float(sec["wu_first"]), float(sec["wu_last"]), n_u)
    return SpectrumGrid(mag, ws, wu)


def write_sweep_csv(result: SweepResult, path) -> Path:
    """One row per grid cell: depth, tilt_deg, metric (NaN for missing)."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["depth", "tilt_deg", result.metric_kind])
        for i, d in enumerate(result.d_values):
            for j, t in enumerate(result.tilt_values):
                writer.writerow([_format_float(d), _format_float(t), _format_float(result.metric[i, j])])
    return path


def read_sweep_csv(path) -> SweepResult:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    kind = rows[0][2]
    d_values = sorted({float(r[0]) for r in rows[1:]})
    t_values = sorted({float(r[1]) for r in rows[1:]})
    metric = np.full((len(d_values), len(t_values)), np.nan)
    d_index = {v: i for i, v in enumerate(d_values)}
    t_index = {v: j for j, v in enumerate(t_values)}
    for r in rows[1:]:
        metric[d_index[float(r[0])], t_index[float(r[1])]] = float(r[2])
    return SweepResult(np.array(d_values), np.array(t_values), metric, kind)


def write_curve_csv(curve: SamplingCurve, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layers", "images_parallel", "images_tilted"])
        for row in zip(curve.layer_counts, curve.images_parallel, curve.images_tilted):
            writer.writerow(row)
    return path


def write_layers_rmse_csv(result: LayersResult, family: str, path) -> Path:
    table = {"parallel": result.rmse_parallel, "tilted": result.rmse_tilted}[family]
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layers", "factor", "rmse"])
        for li, count in enumerate(result.layer_counts):
            for fi, factor in enumerate(result.factors):
                writer.writerow([count, factor, _format_float(table[li, fi])])
    return path


def write_heatmap_pgm(metric: np.ndarray, path) -> Path:
    """Min-max normalized graymap of a metric grid; NaN renders black."""
    path = Path(path)
    finite = np.isfinite(metric)
    view = np.zeros_like(metric, dtype=float)
    if finite.any():
        lo = float(metric[finite].min())
        hi = float(metric[finite].max())
        span = hi - lo if hi > lo else 1.0
        view[finite] = (metric[finite] - lo) / span
    _write_pgm16(view, path)
    return path

