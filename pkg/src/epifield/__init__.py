"""Light-field EPI sampling analysis with a tiltable global image plane."""

from .scene import (
    DEFAULT_OMEGAS,
    DepthLayer,
    DepthRange,
    SceneDef,
    SceneGeometryError,
    SurfaceSpec,
    TextureSpec,
    partition_depth_layers,
)
from .mapping import (
    DEFAULT_U_MAX,
    NoIntersection,
    OcclusionCheck,
    PlaneParam,
    check_no_self_occlusion,
    intersect_ray,
    intersect_rays,
    map_surface_to_image,
    rewarp_coords,
    u_infinity,
)
from .render import (
    Epi,
    NonDivisibleFactor,
    SelfOcclusionError,
    psnr,
    reconstruct_epi,
    render_epi,
    rewarp_epi,
    subsample_epi,
)
from .spectral import (
    ChirpParams,
    FanBounds,
    OptimalDepths,
    SpectrumGrid,
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
    out_of_bound_energy,
    sparsity_rmse,
)
from .experiments import (
    LayersResult,
    SamplingCurve,
    SweepResult,
    layers_experiment,
    plane_mae,
    sweep_plane_mae,
    sweep_reconstruction,
    sweep_sparsity,
)
from .config import (
    ConfigError,
    LayersSpec,
    RunConfig,
    SweepSpec,
    load_config,
    load_preset,
)

__version__ = "0.1.0"
