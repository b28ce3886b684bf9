"""Radial k-space trajectory design for anisotropic fields of view.

Design 2D projection sets, 3D cone sets and 3D projection sets whose
point-spread functions realize arbitrary convex FOV shapes; generate the
matching density compensation; and verify designs with gridding-based PSF
and analytic-phantom analysis.
"""

from .shapes import (
    Circle,
    Diamond,
    Ellipse,
    Rectangle,
    Shape,
    Stadium,
    Star,
    Tabulated,
    dual_shape,
    max_radial_spacing,
    polar_profile,
    shape_from_dict,
)
from .design2d import DegenerateShape, ProjectionSet2D, design_2d, isotropic_count
from .design3d import (
    ConeSet,
    FovConstraintViolated,
    Trajectory3D,
    design_cones,
    design_pr3d_cones,
    design_pr3d_spiral,
)
from .sampling import (
    SampledKSpace,
    SpacingTooCoarse,
    angular_dcf_2d,
    angular_dcf_3d,
    radial_dcf,
    sample_projections,
    spiral_end_ramp,
)
from .gridding import (
    GriddingConfig,
    GridVolume,
    OutOfBand,
    compute_psf,
    direct_dft,
    grid_reconstruct,
    load_grid,
    save_grid,
)
from .analysis import (
    EfficiencyPoint,
    Phantom,
    PhantomReport,
    PsfMetrics,
    RidgeNotFound,
    efficiency_curve,
    fov_volume,
    lowlevel_alias_power,
    measure_fwhm,
    measure_ridge,
    phantom_experiment,
    two_line_psf_model,
    variable_kmax_savings,
)

__version__ = "0.1.0"

__all__ = [
    "Circle", "Diamond", "Ellipse", "Rectangle", "Shape", "Stadium", "Star",
    "Tabulated", "dual_shape", "max_radial_spacing", "polar_profile",
    "shape_from_dict",
    "DegenerateShape", "ProjectionSet2D", "design_2d", "isotropic_count",
    "ConeSet", "FovConstraintViolated", "Trajectory3D", "design_cones",
    "design_pr3d_cones", "design_pr3d_spiral",
    "SampledKSpace", "SpacingTooCoarse", "angular_dcf_2d", "angular_dcf_3d",
    "radial_dcf", "sample_projections", "spiral_end_ramp",
    "GriddingConfig", "GridVolume", "OutOfBand", "compute_psf", "direct_dft",
    "grid_reconstruct", "load_grid", "save_grid",
    "EfficiencyPoint", "Phantom", "PhantomReport", "PsfMetrics",
    "RidgeNotFound", "efficiency_curve", "fov_volume", "lowlevel_alias_power",
    "measure_fwhm", "measure_ridge", "phantom_experiment",
    "two_line_psf_model", "variable_kmax_savings",
    "__version__",
]
