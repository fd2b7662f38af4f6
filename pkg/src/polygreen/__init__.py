"""Polyharmonic Dirichlet Green functions on balls, ball exteriors, and annuli.

Everything lives in dimension n > 2k.  The ball kernel is closed form, the
exterior-of-hole kernel is its image under inversion, and the annulus
kernel is an exact spherical-harmonic series; on top of these sit the
small-hole experiments (uniform-bound scan, derivative blow-up scan,
hole-scaling limit, cutoff gluing) and a CLI.
"""

from .annulus import (
    GreenEvaluation,
    ModalGreenKernel,
    annulus_green,
    annulus_green_derivative,
    annulus_green_radial_dy,
    indicial_exponents,
    modal_solve,
    zonal_harmonic,
)
from .ball import BoggioKernel, ball_green, boggio_auxiliary, boggio_kernel, boggio_profile
from .errors import (
    DomainError,
    PolyGreenError,
    PreconditionError,
    SingularityError,
    SingularSystemError,
    StencilMarginError,
)
from .exterior import (
    ExteriorKernel,
    SampleGrid,
    exterior_derivative_bound_check,
    exterior_green,
    exterior_kernel,
)
from .geometry import (
    AnnulusDomain,
    BallDomain,
    Point,
    ProblemSpec,
    as_point,
    conformal_factor,
    invert,
    mobius_distance_check,
    unit_ball_volume,
    unit_sphere_area,
)
from .polynomials import Polynomial, annulus_bubble, ball_bubble, laplacian, polyharmonic
from .scans import (
    CutoffSpec,
    GlueReport,
    ScanReport,
    cutoff_eval,
    fixed_ball_derivative_statistic,
    glue_residual,
    glued_green,
    scaling_limit,
    scan_derivative,
    scan_uniform,
)

__version__ = "0.1.0"

__all__ = [
    "AnnulusDomain",
    "BallDomain",
    "BoggioKernel",
    "CutoffSpec",
    "DomainError",
    "ExteriorKernel",
    "GlueReport",
    "GreenEvaluation",
    "ModalGreenKernel",
    "Point",
    "PolyGreenError",
    "Polynomial",
    "PreconditionError",
    "ProblemSpec",
    "SampleGrid",
    "ScanReport",
    "SingularSystemError",
    "SingularityError",
    "StencilMarginError",
    "annulus_bubble",
    "annulus_green",
    "annulus_green_derivative",
    "annulus_green_radial_dy",
    "as_point",
    "ball_bubble",
    "ball_green",
    "boggio_auxiliary",
    "boggio_kernel",
    "boggio_profile",
    "conformal_factor",
    "cutoff_eval",
    "exterior_derivative_bound_check",
    "exterior_green",
    "exterior_kernel",
    "fixed_ball_derivative_statistic",
    "glue_residual",
    "glued_green",
    "indicial_exponents",
    "invert",
    "laplacian",
    "mobius_distance_check",
    "modal_solve",
    "polyharmonic",
    "scaling_limit",
    "scan_derivative",
    "scan_uniform",
    "unit_ball_volume",
    "unit_sphere_area",
    "zonal_harmonic",
]
