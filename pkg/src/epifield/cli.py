"""Command-line front end.

Subcommands: render, spectrum, guidelines, sweep-sparsity, reconstruct,
layers. Every run reads an INI config (see config.py; the guidelines
command also accepts a bare --scene preset), writes its artifacts into
the output directory next to a manifest.txt recording the config hash
and seed, and exits 0 on success, 1 for config problems, 2 for failed
preconditions, 3 for I/O failures.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, default_config_for_preset, load_config
from .experiments import (
    layers_experiment,
    sweep_plane_mae,
    sweep_reconstruction,
    sweep_sparsity,
)
from .fileio import (
    write_curve_csv,
    write_epi,
    write_heatmap_pgm,
    write_layers_rmse_csv,
    write_spectrum,
    write_sweep_csv,
)
from .mapping import NoIntersection
from .render import NonDivisibleFactor, SelfOcclusionError, render_epi
from .scene import SceneGeometryError, partition_depth_layers
from .spectral import (
    UnboundedBaseline,
    camera_axis_chirp,
    dft2_magnitude,
    fan_bounds_parallel,
    fan_bounds_tilted,
    max_camera_spacing,
    max_camera_spacing_tilted,
    min_image_count,
    nyquist_omega,
    optimal_depths,
)

_EXIT_OK = 0
_EXIT_CONFIG = 1
_EXIT_PRECONDITION = 2
_EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epifield",
        description="Light-field EPI sampling analysis with a tiltable global image plane.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, config_required: bool = True):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=config_required, help="INI run config")
        cmd.add_argument("--seed", type=int, default=None, help="override [run] seed")
        cmd.add_argument("--out", default=None, help="override [run] out_dir")
        cmd.add_argument("--threads", type=int, default=None, help="override [run] threads")
        return cmd

    add("render", "render an EPI to 16-bit PGM plus sidecar")
    spectrum = add("spectrum", "render, transform, and export the EPI spectrum")
    spectrum.add_argument(
        "--window", choices=("rect", "hann"), default=None, help="override [run] window"
    )
    guidelines = add("guidelines", "print sampling guidance for a scene/plane", False)
    guidelines.add_argument("--scene", default=None, help="preset letter instead of --config")
    sweep = add("sweep-sparsity", "spectral sparsity over a (depth, tilt) grid")
    sweep.add_argument("--heatmap", action="store_true", help="also write PGM heatmaps")
    reconstruct = add("reconstruct", "reconstruction PSNR over a (depth, tilt) grid")
    reconstruct.add_argument(
        "--factor", type=int, default=None, help="override [sweep] subsampling factor"
    )
    add("layers", "layered capture: per-layer planes, error and image counts")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return _EXIT_OK if exc.code in (0, None) else _EXIT_CONFIG
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except (
        SceneGeometryError,
        SelfOcclusionError,
        NoIntersection,
        NonDivisibleFactor,
        UnboundedBaseline,
        ValueError,
    ) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return _EXIT_PRECONDITION
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return _EXIT_IO


def _load(args) -> RunConfig:
    if getattr(args, "scene", None) is not None and args.config is None:
        return default_config_for_preset(
            args.scene,
            seed=args.seed if args.seed is not None else 0,
            out_dir=args.out if args.out is not None else "out",
            threads=args.threads if args.threads is not None else 1,
        )
    if args.config is None:
        raise ConfigError("either --config or --scene is required")
    return load_config(args.config, seed=args.seed, out_dir=args.out, threads=args.threads)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, cfg: RunConfig, artifacts) -> None:
    lines = [
        f"command = {command}",
        f"config_hash = {cfg.config_hash()}",
        f"seed = {cfg.seed}",
        f"version = {__version__}",
    ]
    lines += [f"artifact = {Path(a).name}" for a in artifacts]
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def _dispatch(args) -> int:
    cfg = _load(args)
    handler = {
        "render": _cmd_render,
        "spectrum": _cmd_spectrum,
        "guidelines": _cmd_guidelines,
        "sweep-sparsity": _cmd_sweep_sparsity,
        "reconstruct": _cmd_reconstruct,
        "layers": _cmd_layers,
    }[args.command]
    return handler(args, cfg)


def _cmd_render(args, cfg: RunConfig) -> int:
    epi = render_epi(cfg.scene, cfg.plane, cfg.n_s, cfg.n_u, seed=cfg.seed)
    out = _out_dir(cfg)
    paths = write_epi(epi, out / "epi")
    _write_manifest(out, "render", cfg, paths)
    print(f"wrote {paths[0]} ({cfg.n_s}x{cfg.n_u})")
    return _EXIT_OK


def _cmd_spectrum(args, cfg: RunConfig) -> int:
    window = args.window or cfg.window or "hann"
    epi = render_epi(cfg.scene, cfg.plane, cfg.n_s, cfg.n_u, seed=cfg.seed)
    spec = dft2_magnitude(epi, window=window)
    out = _out_dir(cfg)
    paths = list(write_spectrum(spec, out / "spectrum"))
    bounds_path = out / "bounds.txt"
    bounds_lines = [f"window = {window}"]
    bounds = None
    depth_range = cfg.scene.surface.depth_range()
    if cfg.plane.tilt_deg == 0.0:
        bounds = fan_bounds_parallel(
            cfg.plane, depth_range, margin=cfg.scene.texture.angular_bandwidth
        )
    else:
        layer = partition_depth_layers(cfg.scene.surface, 1)[0]
        try:
            bounds = fan_bounds_tilted(
                cfg.plane, layer, margin=cfg.scene.texture.angular_bandwidth
            )
        except ValueError:
            bounds_lines.append("note = plane does not match the scene's depth-line fit")
    if bounds is not None:
        bounds_lines += [
            f"slope_lo = {bounds.slope_lo!r}",
            f"slope_hi = {bounds.slope_hi!r}",
            f"margin = {bounds.margin!r}",
            f"z_min = {depth_range.z_min!r}",
            f"z_max = {depth_range.z_max!r}",
        ]
    bounds_path.write_text("\n".join(bounds_lines) + "\n")
    paths.append(bounds_path)
    _write_manifest(out, "spectrum", cfg, paths)
    print(f"wrote {paths[0]} (window={window})")
    return _EXIT_OK


def _guideline_lines(cfg: RunConfig) -> list[str]:
    surface = cfg.scene.surface
    depth_range = surface.depth_range()
    depths = optimal_depths(depth_range)
    du = 2.0 * cfg.plane.u_max / (cfg.n_u - 1)
    wu_max = nyquist_omega(du)
    bandwidth = cfg.scene.texture.angular_bandwidth
    lines = [
        f"scene = {cfg.scene.name}",
        f"z_min = {depth_range.z_min:.6g}",
        f"z_max = {depth_range.z_max:.6g}",
        f"focus_depth = {depths.focus_depth:.6g}",
        f"midpoint_depth = {depths.midpoint_depth:.6g}",
        f"plane_depth = {depths.plane_depth:.6g}",
        f"wu_max = {wu_max:.6g}",
        f"view_bandwidth = {bandwidth:.6g}",
    ]
    try:
        spacing = max_camera_spacing(depth_range, cfg.plane.focal, wu_max, bandwidth)
    except UnboundedBaseline:
        spacing = math.inf
    lines.append(f"max_spacing_parallel = {spacing:.6g}")
    lines.append(f"images_parallel = {min_image_count(spacing, cfg.plane.s_max)}")
    layer = partition_depth_layers(surface, 1)[0]
    try:
        spacing_tilted = max_camera_spacing_tilted(layer, cfg.plane.focal, wu_max, bandwidth)
    except UnboundedBaseline:
        spacing_tilted = math.inf
    lines += [
        f"fitted_z0 = {layer.fitted_z0:.6g}",
        f"fitted_tilt_deg = {layer.fitted_tilt_deg:.6g}",
        f"max_spacing_tilted = {spacing_tilted:.6g}",
        f"images_tilted = {min_image_count(spacing_tilted, cfg.plane.s_max)}",
    ]
    if cfg.plane.tilt_deg != 0.0 and not cfg.plane.is_directional:
        x_mid = 0.5 * (surface.x_range[0] + surface.x_range[1])
        z_mid = float(surface.depth(x_mid))
        chirp = camera_axis_chirp(cfg.plane, x_mid, z_mid, wu_max)
        lines += [
            f"s_crossing = {cfg.plane.s_crossing:.6g}",
            f"chirp_base_frequency = {chirp.base_frequency:.6g}",
            f"chirp_rate = {chirp.rate:.6g}",
            f"chirp_crossing_frequency = {chirp.crossing_frequency:.6g}",
        ]
    return lines


def _cmd_guidelines(args, cfg: RunConfig) -> int:
    lines = _guideline_lines(cfg)
    print("\n".join(lines))
    if args.out is not None:
        out = _out_dir(cfg)
        path = out / "guidelines.txt"
        path.write_text("\n".join(lines) + "\n")
        _write_manifest(out, "guidelines", cfg, [path])
    return _EXIT_OK


def _sweep_axes(cfg: RunConfig):
    if cfg.sweep is None:
        raise ConfigError("this command needs a [sweep] section")
    d_values = np.linspace(cfg.sweep.depth_min, cfg.sweep.depth_max, cfg.sweep.depth_count)
    t_values = np.linspace(cfg.sweep.tilt_min, cfg.sweep.tilt_max, cfg.sweep.tilt_count)
    return d_values, t_values


def _cmd_sweep_sparsity(args, cfg: RunConfig) -> int:
    d_values, t_values = _sweep_axes(cfg)
    result = sweep_sparsity(
        cfg.scene,
        d_values,
        t_values,
        focal=cfg.plane.focal,
        s_max=cfg.plane.s_max,
        u_max=cfg.plane.u_max,
        n_s=cfg.n_s,
        n_u=cfg.n_u,
        subsample_factor=cfg.subsample_factor,
        keep_fraction=cfg.keep_fraction,
        window=cfg.window or "rect",
        seed=cfg.seed,
        threads=cfg.threads,
    )
    geometry = sweep_plane_mae(cfg.scene.surface, d_values, t_values)
    out = _out_dir(cfg)
    paths = [
        write_sweep_csv(result, out / "sparsity.csv"),
        write_sweep_csv(geometry, out / "plane_mae.csv"),
    ]
    if args.heatmap:
        paths.append(write_heatmap_pgm(result.metric, out / "sparsity_heatmap.pgm"))
        paths.append(write_heatmap_pgm(geometry.metric, out / "plane_mae_heatmap.pgm"))
    _write_manifest(out, "sweep-sparsity", cfg, paths)
    d_best, t_best = result.opt_cell_values()
    print(f"sparsity argmin: depth={d_best:.6g} tilt={t_best:.6g} deg")
    d_geo, t_geo = geometry.opt_cell_values()
    print(f"plane_mae argmin: depth={d_geo:.6g} tilt={t_geo:.6g} deg")
    return _EXIT_OK


def _cmd_reconstruct(args, cfg: RunConfig) -> int:
    d_values, t_values = _sweep_axes(cfg)
    factor = args.factor if args.factor is not None else cfg.sweep.factor
    result = sweep_reconstruction(
        cfg.scene,
        d_values,
        t_values,
        factor=factor,
        focal=cfg.plane.focal,
        s_max=cfg.plane.s_max,
        u_max=cfg.plane.u_max,
        n_s=cfg.n_s,
        n_u=cfg.n_u,
        seed=cfg.seed,
        threads=cfg.threads,
    )
    out = _out_dir(cfg)
    paths = [write_sweep_csv(result, out / "psnr.csv")]
    _write_manifest(out, "reconstruct", cfg, paths)
    d_best, t_best = result.opt_cell_values()
    print(f"psnr argmax (factor {factor}): depth={d_best:.6g} tilt={t_best:.6g} deg")
    return _EXIT_OK


def _cmd_layers(args, cfg: RunConfig) -> int:
    if cfg.layers is None:
        raise ConfigError("the layers command needs a [layers] section")
    result = layers_experiment(
        cfg.scene,
        cfg.layers.layer_counts,
        cfg.layers.factors,
        n_s=cfg.n_s,
        n_u=cfg.n_u,
        focal=cfg.plane.focal,
        s_max=cfg.plane.s_max,
        u_max=cfg.plane.u_max,
        view_bandwidth=cfg.scene.texture.angular_bandwidth,
        seed=cfg.seed,
    )
    out = _out_dir(cfg)
    paths = [
        write_layers_rmse_csv(result, "parallel", out / "layers_rmse_parallel.csv"),
        write_layers_rmse_csv(result, "tilted", out / "layers_rmse_tilted.csv"),
        write_curve_csv(result.curve, out / "sampling_curve.csv"),
    ]
    _write_manifest(out, "layers", cfg, paths)
    for count, img_p, img_t in zip(
        result.curve.layer_counts, result.curve.images_parallel, result.curve.images_tilted
    ):
        print(f"L={count}: images parallel={img_p} tilted={img_t}")
    return _EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
