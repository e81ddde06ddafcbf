"""Event-driven PDMP samplers (BPS, Zig-Zag, Coordinate Sampler) for
piecewise-smooth target densities."""

from ._core import (  # noqa: F401
    Basis,
    BoundaryKernel,
    BoundaryPoint,
    Error,
    InvalidArgument,
    BoundaryAmbiguous,
    DegenerateBoundary,
    NotFinite,
    UnsupportedCombination,
    NotClosedForm,
    ConfigError,
    SchemaMismatch,
    PiecewiseTarget,
    Rng,
    VelocitySpace,
    affine_event_time,
    apply_kernel,
    experiment,
    l_density,
    make_cube_target,
    oracle,
    simulate,
    zz_exit_time,
)

__all__ = [
    "Basis",
    "BoundaryKernel",
    "BoundaryPoint",
    "PiecewiseTarget",
    "Rng",
    "VelocitySpace",
    "affine_event_time",
    "apply_kernel",
    "experiment",
    "l_density",
    "make_cube_target",
    "oracle",
    "simulate",
    "zz_exit_time",
]
