"""Spectral analysis of EPIs and the sampling guidelines derived from it.

The 2D spectrum of an EPI concentrates along lines through DC whose
slope is set by scene depth: a feature at depth z under a plane at depth
D contributes near omega_s = focal * (1/z - 1/D) * omega_u. A depth range
therefore predicts a fan-shaped support region, and the widest camera
spacing that avoids aliasing follows from the fan's extreme lines plus
any view-dependence bandwidth of the texture.

Angular frequencies are in rad per unit s (omega_s) and rad per unit u
(omega_u); texture frequencies enter in rad/m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mapping import PlaneParam
from .render import Epi
from .scene import DepthLayer, DepthRange

__all__ = [
    "UnboundedBaseline",
    "SpectrumGrid",
    "FanBounds",
    "OptimalDepths",
    "ChirpParams",
    "dft2_magnitude",
    "sparsity_rmse",
    "fan_bounds_parallel",
    "fan_bounds_tilted",
    "out_of_bound_energy",
    "optimal_depths",
    "max_camera_spacing",
    "max_camera_spacing_tilted",
    "min_image_count",
    "camera_axis_chirp",
    "nyquist_omega",
]


class UnboundedBaseline(RuntimeError):
    """The anti-aliasing bound degenerates: any camera spacing works."""


def nyquist_omega(spacing: float) -> float:
    """Highest representable angular frequency for a given sample spacing."""
    return math.pi / spacing


@dataclass
class SpectrumGrid:
    """Centered DFT magnitude of an EPI with physical frequency axes."""

    mag: np.ndarray  # (n_s, n_u), DC at index (n_s//2, n_u//2)
    ws_axis: np.ndarray  # [rad per unit s]
    wu_axis: np.ndarray  # [rad per unit u]

    def total_energy(self) -> float:
        return float(np.sum(np.square(self.mag)))


def dft2_magnitude(epi: Epi, window: str = "hann") -> SpectrumGrid:
    """Centered 2D DFT magnitude of an EPI.

    The default separable Hann taper keeps leakage from off-bin content
    below a few hundredths of a percent, which matters whenever energies
    are compared against support predictions. window="rect" skips the
    taper; the transform is orthonormal, so in that case the squared
    magnitudes sum exactly to the EPI energy.
    """
    data = epi.data
    if window == "hann":
        data = data * (np.hanning(epi.n_s)[:, None] * np.hanning(epi.n_u)[None, :])
    elif window != "rect":
        raise ValueError(f"unknown window {window!r}")
    mag = np.abs(np.fft.fftshift(np.fft.fft2(data, norm="ortho")))
    ws = 2.0 * math.pi * np.fft.fftshift(np.fft.fftfreq(epi.n_s, d=epi.ds))
    wu = 2.0 * math.pi * np.fft.fftshift(np.fft.fftfreq(epi.n_u, d=epi.du))
    return SpectrumGrid(mag, ws, wu)


def sparsity_rmse(spectrum: SpectrumGrid, keep_fraction: float = 0.01) -> float:
    """RMSE against the best keep_fraction-sparse copy of the spectrum.

    Keeps the ceil(keep_fraction * size) largest-magnitude bins (ties
    resolved by the partition, deterministically for a fixed input) and
    zeroes the rest; the error is then just the dropped energy:
    sqrt(sum of dropped magnitudes squared / size).
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError("keep_fraction must be in (0, 1]")
    flat = spectrum.mag.ravel()
    keep = math.ceil(keep_fraction * flat.size)
    if keep >= flat.size:
        return 0.0
    part = np.partition(flat, flat.size - keep)
    dropped = part[: flat.size - keep]
    return float(math.sqrt(np.sum(np.square(dropped)) / flat.size))


@dataclass(frozen=True)
class FanBounds:
    """Predicted spectral support: the fan between two lines through DC.

    slope_lo and slope_hi are the reciprocal slopes d(omega_u)/d(omega_s)
    of the bounding lines, one per depth extreme (z_min first). A depth
    equal to the plane depth gives an infinite value, meaning the line
    omega_s = 0. margin widens the fan by a fixed amount along omega_s;
    use the texture's view bandwidth, or one frequency bin for grids.
    """

    slope_lo: float
    slope_hi: float
    margin: float = 0.0


def _bound_slope(z: float, param: PlaneParam) -> float:
    if param.is_directional:
        return z / param.focal
    gap = param.depth - z
    if gap == 0.0:
        return math.inf
    return z * param.depth / (param.focal * gap)


def fan_bounds_parallel(
    param: PlaneParam, depth_range: DepthRange, margin: float = 0.0
) -> FanBounds:
    """Fan bounds for a parallel (untilted) plane from a depth range."""
    if param.tilt_deg != 0.0:
        raise ValueError("fan_bounds_parallel requires an untilted plane")
    return FanBounds(
        slope_lo=_bound_slope(depth_range.z_min, param),
        slope_hi=_bound_slope(depth_range.z_max, param),
        margin=margin,
    )


def fan_bounds_tilted(
    param: PlaneParam, layer: DepthLayer, margin: float = 0.0
) -> FanBounds:
    """Fan bounds for a plane aligned with a layer's depth-line fit.

    The bounding slopes follow from the fit residual extremes instead of
    the raw depths; an exact plane layer (zero residuals) collapses the
    fan onto the omega_s = 0 line. The plane must match the layer fit.
    """
    if not (
        math.isclose(param.depth, layer.fitted_z0, rel_tol=1e-9, abs_tol=1e-12)
        and math.isclose(param.tilt_deg, layer.fitted_tilt_deg, rel_tol=1e-9, abs_tol=1e-12)
    ):
        raise ValueError("plane parameters do not match the layer fit")
    r_lo, r_hi = layer.residual_range
    dr = layer.depth_range

    def slope(z, r):
        if r == 0.0:
            return math.inf
        return z * param.depth / (param.focal * r)

    return FanBounds(slope(dr.z_min, r_lo), slope(dr.z_max, r_hi), margin)


def out_of_bound_energy(spectrum: SpectrumGrid, bounds: FanBounds) -> float:
    """Fraction of spectral energy outside the fan (margin included).

    The fan is the continuous region between the two bounding lines,
    widened by the margin along omega_s; a bin counts as inside when its
    grid cell overlaps that region, since each DFT bin stands for a cell
    of frequency space, not a point. Infinite stored slopes contribute
    the line omega_s = 0, so the DC bin is always inside. Returns 0 for
    an all-zero spectrum.
    """
    m_lo = 0.0 if math.isinf(bounds.slope_lo) else 1.0 / bounds.slope_lo
    m_hi = 0.0 if math.isinf(bounds.slope_hi) else 1.0 / bounds.slope_hi
    wu = spectrum.wu_axis
    ws = spectrum.ws_axis
    half_u = 0.5 * float(wu[1] - wu[0]) if wu.size > 1 else 0.0
    half_s = 0.5 * float(ws[1] - ws[0]) if ws.size > 1 else 0.0
    wu_lo = (wu - half_u)[None, :]
    wu_hi = (wu + half_u)[None, :]
    corners = (m_lo * wu_lo, m_lo * wu_hi, m_hi * wu_lo, m_hi * wu_hi)
    lo = np.minimum.reduce(corners) - bounds.margin
    hi = np.maximum.reduce(corners) + bounds.margin
    wsc = ws[:, None]
    inside = (wsc + half_s >= lo) & (wsc - half_s <= hi)
    energy = np.square(spectrum.mag)
    total = energy.sum()
    if total == 0.0:
        return 0.0
    return float(energy[~inside].sum() / total)


@dataclass(frozen=True)
class OptimalDepths:
    """Distinguished depths of a range.

    focus_depth is the harmonic mean (best single rendering focus),
    midpoint_depth the arithmetic midpoint (geometric center), and
    plane_depth the global-plane depth that balances the fan; the
    harmonic pair coincides by construction.
    """

    focus_depth: float
    midpoint_depth: float
    plane_depth: float


def optimal_depths(depth_range: DepthRange) -> OptimalDepths:
    harmonic = 2.0 / (1.0 / depth_range.z_min + 1.0 / depth_range.z_max)
    return OptimalDepths(
        focus_depth=harmonic,
        midpoint_depth=0.5 * (depth_range.z_min + depth_range.z_max),
        plane_depth=harmonic,
    )


def max_camera_spacing(
    depth_range: DepthRange,
    focal: float,
    wu_max: float,
    view_bandwidth: float = 0.0,
) -> float:
    """Widest alias-free camera spacing for a parallel plane.

    The spacing is 1 / (focal * (1/z_min - 1/z_max) * wu_max +
    2 * view_bandwidth); when the denominator vanishes (a single depth and
    a Lambertian texture) the baseline is unbounded and UnboundedBaseline
    is raised.
    """
    if wu_max < 0.0 or view_bandwidth < 0.0:
        raise ValueError("wu_max and view_bandwidth must be >= 0")
    denom = (
        focal * (1.0 / depth_range.z_min - 1.0 / depth_range.z_max) * wu_max
        + 2.0 * view_bandwidth
    )
    if denom == 0.0:
        raise UnboundedBaseline("flat depth and Lambertian texture: any spacing works")
    return 1.0 / denom


def max_camera_spacing_tilted(
    layer: DepthLayer,
    focal: float,
    wu_max: float,
    view_bandwidth: float = 0.0,
) -> float:
    """Widest alias-free spacing for a plane aligned with a layer fit.

    Replaces the raw depth spread by the fit residual extremes scaled by
    the fitted plane depth: 1 / ((focal / fitted_z0) * |r_min/z_min -
    r_max/z_max| * wu_max + 2 * view_bandwidth).
    """
    if wu_max < 0.0 or view_bandwidth < 0.0:
        raise ValueError("wu_max and view_bandwidth must be >= 0")
    r_lo, r_hi = layer.residual_range
    dr = layer.depth_range
    denom = (focal / layer.fitted_z0) * abs(
        r_lo / dr.z_min - r_hi / dr.z_max
    ) * wu_max + 2.0 * view_bandwidth
    if denom == 0.0:
        raise UnboundedBaseline("exact plane layer and Lambertian texture")
    return 1.0 / denom


def min_image_count(spacing: float, s_max: float) -> int:
    """Cameras needed to cover [-s_max, s_max] at the given spacing.

    ceil(2 * s_max / spacing) + 1; an infinite spacing (unbounded
    baseline) still needs the two end cameras.
    """
    if not spacing > 0.0:
        raise ValueError("spacing must be positive")
    if math.isinf(spacing):
        return 2
    return max(2, math.ceil(2.0 * s_max / spacing) + 1)


@dataclass(frozen=True)
class ChirpParams:
    """Local frequency model along the camera axis under a tilted plane.

    A texture frequency wu at a surface point maps to an s-frequency that
    drifts linearly with s: it starts at base_frequency and changes at
    rate 2 * rate per unit s. crossing_frequency is its value where the
    plane meets the camera line, the extreme the sampling bound must cover.
    """

    base_frequency: float
    rate: float
    crossing_frequency: float

    def frequency_at(self, s):
        return self.base_frequency + 2.0 * self.rate * np.asarray(s, dtype=float)


def camera_axis_chirp(param: PlaneParam, x: float, z: float, wu: float) -> ChirpParams:
    """Chirp parameters for a point at (x, z) under a tilted finite plane."""
    if param.is_directional:
        raise ValueError("chirp model needs a finite plane depth")
    if param.tilt_deg == 0.0:
        raise ValueError("chirp model needs a tilted plane")
    if not z > 0.0:
        raise ValueError("depth must be positive")
    t = param.tilt_slope
    base_scale = wu * param.focal / (param.depth * z)
    return ChirpParams(
        base_frequency=base_scale * (param.depth - z - t * x),
        rate=base_scale * t * (param.depth - z) / param.depth,
        crossing_frequency=base_scale * (z - param.depth - t * x),
    )
