"""Green's functions of planar Brownian motion stopped at exit and winding times."""
from .closed_form import (
    GreensKind,
    GreensValue,
    closed_form_for,
    exit_time_greens,
    greens_disk,
    greens_half_plane,
    greens_punctured_disk,
    greens_right_half_plane,
    greens_strip,
    greens_strip_map,
    greens_whole_plane,
    greens_winding,
    winding_regular_limit,
)
from .complex_geometry import (
    INFINITY,
    Disk,
    DiskAutomorphism,
    ExitTime,
    Exp,
    Mobius,
    MobiusTransform,
    Power,
    PuncturedDisk,
    RightHalfPlane,
    Strip,
    TanQuarterStrip,
    UpperHalfPlane,
    WindingTime,
    mobius_apply,
    preimages,
)
from .errors import *  # noqa: F401,F403
from .heat_kernel import KernelSeriesConfig, integrate_kernel, rho_half_plane, rho_plane, rho_strip
from .identities import IdentityCase, IdentityReport, verify
from .mc_engine import (
    GridSpec,
    MCConfig,
    OccupationGrid,
    PathSample,
    estimate_greens,
    occupation_density,
    project_path,
    sample_path,
    sample_paths,
    stop_points,
)
from .pushforward import PushforwardProblem, continuity_probe, pushforward_greens
from .series import SeriesTruncation

__version__ = "0.1.0"
