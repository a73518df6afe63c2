"""Two-plane ray parameterization with a tiltable global image plane.

A ray is indexed by the pair (s, u). s is the camera position on the
z = 0 line. u locates the ray's crossing of a single global image plane
shared by all cameras: the plane passes through (0, depth) at an angle
tilt_deg, and u is the image coordinate of the crossing point as seen by
a pinhole at the origin with focal length `focal`. For a parallel plane
(tilt 0) this reduces to u = focal * X / depth where X is the lateral
crossing position; letting depth go to infinity turns u into a pure
direction coordinate.

With a tilted plane the map between u and the parallel-plane coordinate
at the same depth is the perspective factor (1 + s * tan(tilt) / depth):
the plane meets the camera line at s = -depth / tan(tilt), and cameras
must stay on the near side of that crossing for the parameterization to
stay one-to-one. The constructor enforces this; experiment code that
knowingly extrapolates past the crossing may pass check=False.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

import numpy as np

from .scene import SurfaceSpec

__all__ = [
    "DEFAULT_U_MAX",
    "NoIntersection",
    "PlaneParam",
    "OcclusionCheck",
    "map_surface_to_image",
    "u_infinity",
    "intersect_ray",
    "intersect_rays",
    "rewarp_coords",
    "check_no_self_occlusion",
]

# Half-width of the image window for a 30 degree field of view at focal 1.
DEFAULT_U_MAX = 0.2679


class NoIntersection(RuntimeError):
    """The ray does not meet the surface inside its lateral extent."""


@dataclass(frozen=True)
class PlaneParam:
    """Capture geometry: camera-line extent plus the global image plane.

    depth may be math.inf, selecting the directional limit; a directional
    plane cannot be tilted. All validation lives in validate() so callers
    with a legitimate reason (see module docstring) can skip it.
    """

    focal: float
    depth: float
    tilt_deg: float = 0.0
    s_max: float = 1.0
    u_max: float = DEFAULT_U_MAX
    check: InitVar[bool] = True

    def __post_init__(self, check):
        if check:
            self.validate()

    def validate(self) -> None:
        if not self.focal > 0.0:
            raise ValueError("focal length must be positive")
        if not self.depth > 0.0:
            raise ValueError("plane depth must be positive (math.inf allowed)")
        if not (self.s_max > 0.0 and self.u_max > 0.0):
            raise ValueError("s_max and u_max must be positive")
        if abs(self.tilt_deg) >= 90.0:
            raise ValueError("plane tilt must satisfy |tilt| < 90 deg")
        if self.tilt_deg != 0.0:
            if self.is_directional:
                raise ValueError("a directional (infinite-depth) plane cannot be tilted")
            if self.s_max >= abs(self.s_crossing):
                raise ValueError(
                    f"camera range +-{self.s_max} reaches the plane/camera-line "
                    f"crossing at s = {self.s_crossing:.6g}"
                )

    @property
    def is_directional(self) -> bool:
        return math.isinf(self.depth)

    @property
    def tilt_slope(self) -> float:
        return math.tan(math.radians(self.tilt_deg))

    @property
    def inv_depth(self) -> float:
        return 0.0 if self.is_directional else 1.0 / self.depth

    @property
    def s_crossing(self) -> float:
        """Camera-line coordinate where the plane hits z = 0 (inf if parallel)."""
        if self.tilt_deg == 0.0 or self.is_directional:
            return math.inf
        return -self.depth / self.tilt_slope

    def tilt_scale(self, s):
        """Perspective factor 1 + s * tan(tilt) / depth; 1 exactly when parallel."""
        return 1.0 + np.multiply(s, self.tilt_slope * self.inv_depth)


@dataclass(frozen=True)
class OcclusionCheck:
    """Result of the self-occlusion test: worst surface slope vs. the limit."""

    ok: bool
    worst_slope: float
    slope_limit: float


def map_surface_to_image(param: PlaneParam, surface: SurfaceSpec, x, s):
    """Image coordinate u of the surface point at x seen from camera s.

    Follows the ray from (s, 0) through (x, z(x)) to the global plane.
    The analytic profile is evaluated as given; the lateral extent is
    enforced by intersect_ray, not here. Broadcasts over x and s.
    """
    z = surface.depth(x)
    u_parallel = np.multiply(x, param.focal) / z + np.multiply(s, param.focal) * (
        param.inv_depth - 1.0 / z
    )
    return u_parallel / param.tilt_scale(s)


def u_infinity(param: PlaneParam, s, u):
    """Direction coordinate of the ray (s, u): its u in the infinite-depth limit."""
    return param.tilt_scale(s) * np.asarray(u, dtype=float) - np.multiply(
        s, param.focal * param.inv_depth
    )


def intersect_rays(param: PlaneParam, surface: SurfaceSpec, s, u):
    """Vectorized ray/surface intersection.

    Returns (x, hit). x holds the lateral coordinate of the crossing with
    the smallest positive depth inside the surface extent and is NaN where
    the ray misses; hit is the boolean mask of valid entries. Substituting
    the ray into the quadratic profile gives

        quad * A * x**2 + (tan(tilt_s) * A - focal * depth) * x
            + (z0 * A + s * focal * depth) = 0,  A = u * scale * depth - s * focal,

    where tilt_s is the surface tilt and scale the plane's perspective
    factor; the directional limit divides through by depth.
    """
    s = np.asarray(s, dtype=float)
    u = np.asarray(u, dtype=float)
    s, u = np.broadcast_arrays(s, u)
    u_plane = u * param.tilt_scale(s)
    if param.is_directional:
        aa = surface.quad * u_plane
        bb = surface.tilt_slope * u_plane - param.focal
        cc = surface.z0 * u_plane + s * param.focal
    else:
        big_a = u_plane * param.depth - s * param.focal
        aa = surface.quad * big_a
        bb = surface.tilt_slope * big_a - param.focal * param.depth
        cc = surface.z0 * big_a + s * param.focal * param.depth

    with np.errstate(divide="ignore", invalid="ignore"):
        linear = aa == 0.0
        x_lin = np.where(linear & (bb != 0.0), -cc / np.where(bb != 0.0, bb, 1.0), np.nan)
        disc = bb * bb - 4.0 * aa * cc
        solvable = ~linear & (disc >= 0.0)
        sqrt_disc = np.sqrt(np.where(solvable, disc, 0.0))
        # stable form: the larger-magnitude root first, companion via c / q
        qq = -0.5 * (bb + np.where(bb >= 0.0, 1.0, -1.0) * sqrt_disc)
        r1 = np.where(solvable & (aa != 0.0), qq / np.where(aa != 0.0, aa, 1.0), np.nan)
        r2 = np.where(solvable & (qq != 0.0), cc / np.where(qq != 0.0, qq, 1.0), np.nan)

    x = np.where(linear, x_lin, np.nan)
    v1, z1 = _valid_root(surface, r1)
    v2, z2 = _valid_root(surface, r2)
    both = v1 & v2
    pick2 = (v2 & ~v1) | (both & (z2 < z1))
    x = np.where(pick2, r2, np.where(v1, r1, x))
    v_lin, _ = _valid_root(surface, x_lin)
    x = np.where(linear & ~v_lin, np.nan, x)
    hit = np.isfinite(x)
    return x, hit


def _valid_root(surface: SurfaceSpec, r):
    # huge rejected candidates may overflow the depth polynomial; that is fine
    with np.errstate(invalid="ignore", over="ignore"):
        z = surface.depth(r)
        ok = np.isfinite(r) & surface.contains(r) & (z > 0.0)
    return ok, z


def intersect_ray(param: PlaneParam, surface: SurfaceSpec, s: float, u: float) -> float:
    """Scalar intersection; raises NoIntersection when the ray misses."""
    x, hit = intersect_rays(param, surface, s, u)
    if not hit:
        raise NoIntersection(f"ray (s={s}, u={u}) misses the surface")
    return float(x)


def rewarp_coords(src: PlaneParam, dst: PlaneParam, s, u_src):
    """Coordinates of the same physical rays under a different plane.

    The camera line is shared, so s passes through unchanged and only u is
    remapped (via the direction coordinate). Both parameterizations must
    share the focal length. src == dst returns the input exactly.
    """
    if src.focal != dst.focal:
        raise ValueError("rewarp requires a shared focal length")
    if src == dst:
        return np.array(u_src, dtype=float, copy=True)
    ui = u_infinity(src, s, u_src)
    return (ui + np.multiply(s, dst.focal * dst.inv_depth)) / dst.tilt_scale(s)


def check_no_self_occlusion(surface: SurfaceSpec, param: PlaneParam) -> OcclusionCheck:
    """Sufficient condition for the surface to be fully visible.

    Every ray in the capture stays within |slope| < focal / (u_max +
    s_max * focal / depth) of vertical, so a surface whose |dz/dx| stays
    below that limit everywhere cannot occlude itself. The slope is affine
    in x, so the extremes sit at the extent endpoints.
    """
    limit = param.focal / (param.u_max + param.s_max * param.focal * param.inv_depth)
    lo, hi = surface.x_range
    worst = max(abs(surface.depth_slope(lo)), abs(surface.depth_slope(hi)))
    return OcclusionCheck(ok=worst < limit, worst_slope=worst, slope_limit=limit)
