"""Run configuration: INI files with scene presets.

A run config collects a scene (usually one of the shipped presets), the
capture plane, grid sizes and run housekeeping. Parsing errors (missing
keys, unparseable numbers) raise ConfigError; domain violations (negative
focal length, camera range touching the plane crossing) surface as the
constructing type's own error so the CLI can report them as failed
preconditions rather than malformed input. The plane depth accepts the
token "infinity" for the directional limit.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .mapping import DEFAULT_U_MAX, PlaneParam
from .scene import DEFAULT_OMEGAS, SceneDef, SurfaceSpec, TextureSpec

__all__ = [
    "ConfigError",
    "SweepSpec",
    "LayersSpec",
    "RunConfig",
    "load_config",
    "load_preset",
    "PRESET_NAMES",
]

PRESET_NAMES = ("A", "B", "C")


class ConfigError(ValueError):
    """The configuration file is missing, malformed, or untypable."""


@dataclass(frozen=True)
class SweepSpec:
    depth_min: float
    depth_max: float
    depth_count: int
    tilt_min: float
    tilt_max: float
    tilt_count: int
    factor: int = 1


@dataclass(frozen=True)
class LayersSpec:
    layer_counts: tuple[int, ...]
    factors: tuple[int, ...]


@dataclass
class RunConfig:
    scene: SceneDef
    plane: PlaneParam
    n_s: int
    n_u: int
    seed: int
    out_dir: str
    threads: int
    window: str | None
    keep_fraction: float
    subsample_factor: int
    sweep: SweepSpec | None = None
    layers: LayersSpec | None = None

    def canonical(self) -> str:
        """Deterministic one-line-per-field rendering of the semantic fields.

        The seed is recorded separately in manifests and out_dir/threads do
        not change results, so none of them enter the hash.
        """
        surf = self.scene.surface
        tex = self.scene.texture
        fields = {
            "grid.n_s": str(self.n_s),
            "grid.n_u": str(self.n_u),
            "plane.depth": repr(self.plane.depth),
            "plane.focal": repr(self.plane.focal),
            "plane.s_max": repr(self.plane.s_max),
            "plane.tilt_deg": repr(self.plane.tilt_deg),
            "plane.u_max": repr(self.plane.u_max),
            "run.keep_fraction": repr(self.keep_fraction),
            "run.subsample_factor": str(self.subsample_factor),
            "run.window": self.window or "auto",
            "scene.name": self.scene.name,
            "scene.quad": repr(surf.quad),
            "scene.tilt_deg": repr(surf.tilt_deg),
            "scene.x_range": repr(surf.x_range),
            "scene.z0": repr(surf.z0),
            "texture.angular_bandwidth": repr(tex.angular_bandwidth),
            "texture.noise_sigma": repr(tex.noise_sigma),
            "texture.omegas": " ".join(repr(w) for w in tex.omegas),
        }
        if self.sweep is not None:
            fields["sweep.depths"] = (
                f"{self.sweep.depth_min!r} {self.sweep.depth_max!r} {self.sweep.depth_count}"
            )
            fields["sweep.tilts"] = (
                f"{self.sweep.tilt_min!r} {self.sweep.tilt_max!r} {self.sweep.tilt_count}"
            )
            fields["sweep.factor"] = str(self.sweep.factor)
        if self.layers is not None:
            fields["layers.layer_counts"] = " ".join(map(str, self.layers.layer_counts))
            fields["layers.factors"] = " ".join(map(str, self.layers.factors))
        return "\n".join(f"{k} = {v}" for k, v in sorted(fields.items()))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def _preset_text(name: str) -> str:
    fname = f"scene_{name.lower()}.cfg"
    return resources.files("epifield").joinpath("presets", fname).read_text()


def _parse_ini(text: str, origin: str):
    import configparser

    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from exc
    return parser


def _get(section, key, convert, origin):
    if key not in section:
        raise ConfigError(f"{origin}: missing key '{key}' in [{section.name}]")
    raw = section[key]
    try:
        return convert(raw)
    except ValueError as exc:
        raise ConfigError(f"{origin}: bad value for {key}: {raw!r}") from exc


def _opt(section, key, convert, default, origin):
    if section is None or key not in section:
        return default
    return _get(section, key, convert, origin)


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.split())


def _ints(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in raw.split())


def _surface_fields(section, origin) -> dict:
    return {
        "z0": _get(section, "z0", float, origin),
        "tilt_deg": _get(section, "tilt_deg", float, origin),
        "quad": _get(section, "quad", float, origin),
        "x_range": (
            _get(section, "x_min", float, origin),
            _get(section, "x_max", float, origin),
        ),
    }


def _texture_fields(section, origin, base: dict | None = None) -> dict:
    fields = dict(base) if base else {
        "omegas": DEFAULT_OMEGAS,
        "angular_bandwidth": 0.0,
        "noise_sigma": 0.0,
    }
    if section is None:
        return fields
    if "omegas" in section:
        fields["omegas"] = _get(section, "omegas", _floats, origin)
    if "angular_bandwidth" in section:
        fields["angular_bandwidth"] = _get(section, "angular_bandwidth", float, origin)
    if "noise_sigma" in section:
        fields["noise_sigma"] = _get(section, "noise_sigma", float, origin)
    return fields


def load_preset(name: str) -> SceneDef:
    """One of the shipped scenes (A, B, C) as a ready SceneDef."""
    key = name.strip().upper()
    if key not in PRESET_NAMES:
        raise ConfigError(f"unknown scene preset {name!r} (have {', '.join(PRESET_NAMES)})")
    origin = f"preset {key}"
    parser = _parse_ini(_preset_text(key), origin)
    surface = SurfaceSpec(**_surface_fields(parser["scene"], origin))
    texture = TextureSpec(
        **_texture_fields(parser["texture"] if "texture" in parser else None, origin)
    )
    return SceneDef(surface, texture, name=key)


def _build_scene(parser, origin: str) -> SceneDef:
    if "scene" not in parser:
        raise ConfigError(f"{origin}: missing [scene] section")
    section = parser["scene"]
    tex_section = parser["texture"] if "texture" in parser else None
    if "preset" in section:
        base = load_preset(section["preset"])
        tex_base = {
            "omegas": base.texture.omegas,
            "angular_bandwidth": base.texture.angular_bandwidth,
            "noise_sigma": base.texture.noise_sigma,
        }
        texture = TextureSpec(**_texture_fields(tex_section, origin, tex_base))
        return SceneDef(base.surface, texture, name=base.name)
    surface = SurfaceSpec(**_surface_fields(section, origin))
    texture = TextureSpec(**_texture_fields(tex_section, origin))
    return SceneDef(surface, texture, name=section.get("name", "custom"))


def load_config(
    path,
    *,
    seed: int | None = None,
    out_dir: str | None = None,
    threads: int | None = None,
) -> RunConfig:
    """Parse an INI run config, applying any CLI overrides.

    Raises ConfigError for structural problems; lets domain validation
    errors from the constructed types propagate.
    """
    path = Path(path)
    origin = str(path)
    if not path.is_file():
        raise ConfigError(f"{origin}: no such config file")
    parser = _parse_ini(path.read_text(), origin)

    scene = _build_scene(parser, origin)

    if "plane" not in parser:
        raise ConfigError(f"{origin}: missing [plane] section")
    plane_sec = parser["plane"]
    plane_raw = {
        "focal": _get(plane_sec, "focal", float, origin) if "focal" in plane_sec else 1.0,
        "depth": _get(plane_sec, "depth", float, origin),
        "tilt_deg": _get(plane_sec, "tilt_deg", float, origin) if "tilt_deg" in plane_sec else 0.0,
        "s_max": _get(plane_sec, "s_max", float, origin) if "s_max" in plane_sec else 1.0,
        "u_max": _get(plane_sec, "u_max", float, origin) if "u_max" in plane_sec else DEFAULT_U_MAX,
    }
    plane = PlaneParam(**plane_raw)

    grid = parser["grid"] if "grid" in parser else None
    run = parser["run"] if "run" in parser else None
    cfg = RunConfig(
        scene=scene,
        plane=plane,
        n_s=_opt(grid, "n_s", int, 512, origin),
        n_u=_opt(grid, "n_u", int, 512, origin),
        seed=seed if seed is not None else _opt(run, "seed", int, 0, origin),
        out_dir=out_dir if out_dir is not None else _opt(run, "out_dir", str, "out", origin),
        threads=threads if threads is not None else _opt(run, "threads", int, 1, origin),
        window=_opt(run, "window", str, None, origin),
        keep_fraction=_opt(run, "keep_fraction", float, 0.01, origin),
        subsample_factor=_opt(run, "subsample_factor", int, 1, origin),
    )
    if cfg.window not in (None, "rect", "hann"):
        raise ConfigError(f"{origin}: window must be rect or hann, got {cfg.window!r}")
    if cfg.n_s < 2 or cfg.n_u < 2:
        raise ConfigError(f"{origin}: grid sizes must be >= 2")

    if "sweep" in parser:
        sw = parser["sweep"]
        cfg.sweep = SweepSpec(
            depth_min=_get(sw, "depth_min", float, origin),
            depth_max=_get(sw, "depth_max", float, origin),
            depth_count=_get(sw, "depth_count", int, origin),
            tilt_min=_get(sw, "tilt_min", float, origin),
            tilt_max=_get(sw, "tilt_max", float, origin),
            tilt_count=_get(sw, "tilt_count", int, origin),
            factor=_get(sw, "factor", int, origin) if "factor" in sw else 1,
        )
        if cfg.sweep.depth_count < 1 or cfg.sweep.tilt_count < 1:
            raise ConfigError(f"{origin}: sweep counts must be >= 1")
    if "layers" in parser:
        ly = parser["layers"]
        cfg.layers = LayersSpec(
            layer_counts=_get(ly, "layer_counts", _ints, origin),
            factors=_get(ly, "factors", _ints, origin),
        )
        if not cfg.layers.layer_counts or not cfg.layers.factors:
            raise ConfigError(f"{origin}: layer_counts and factors must be nonempty")
    return cfg


def default_config_for_preset(
    name: str,
    *,
    seed: int = 0,
    out_dir: str = "out",
    threads: int = 1,
) -> RunConfig:
    """Convenience config: preset scene under the default directional plane."""
    scene = load_preset(name)
    return RunConfig(
        scene=scene,
        plane=PlaneParam(focal=1.0, depth=math.inf),
        n_s=512,
        n_u=512,
        seed=seed,
        out_dir=out_dir,
        threads=threads,
        window=None,
        keep_fraction=0.01,
        subsample_factor=1,
    )
