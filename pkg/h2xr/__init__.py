"""
h2xr - Minimal surfaces in H²×ℝ

Solves Jenkins-Serrin type minimal graphs over truncated wedges of the
hyperbolic plane, measures their geometry, integrates conjugate and
associate surfaces, and assembles complete surfaces by Schwarz reflection.
"""

__version__ = "0.1.0"
__author__ = "Sirius Wu"
__license__ = "MIT"

from .hypgeom import DiskPoint, SpacePoint, Geodesic, SpaceIsometry, geodesic_through, make_isometry
from .meshdom import BoundaryTag, WedgeSpec, TriMesh, alpha_min, build_wedge, refine
from .graphsolve import (
    ScalarField,
    SolverConfig,
    SolveReport,
    solve_capped,
    cap_sweep,
    limit_estimate,
)
from .surfgeo import Immersion, immerse, geometry, total_curvature, gauss_bonnet_audit
from .conjugate import (
    conformal_chart,
    harmonic_conjugate,
    hopf,
    associate_immersion,
    conjugate_boundary_audit,
)
from .assembly import (
    SurfaceComplex,
    extend,
    build_sigma_alpha_k,
    build_sigma_alpha,
    build_sigma_k,
    embeddedness_check,
    seam_continuity_check,
)
from .config import RunConfig, load_config
from .exceptions import (
    H2xrError,
    DomainError,
    DegenerateInputError,
    MeshCapacityError,
    ConvergenceError,
    SolverIntegrityError,
    ChartError,
    PeriodError,
    IntegrationError,
    SeamError,
    ConfigError,
    AuditGateError,
)

__all__ = [
    "DiskPoint",
    "SpacePoint",
    "Geodesic",
    "SpaceIsometry",
    "geodesic_through",
    "make_isometry",
    "BoundaryTag",
    "WedgeSpec",
    "TriMesh",
    "alpha_min",
    "build_wedge",
    "refine",
    "ScalarField",
    "SolverConfig",
    "SolveReport",
    "solve_capped",
    "cap_sweep",
    "limit_estimate",
    "Immersion",
    "immerse",
    "geometry",
    "total_curvature",
    "gauss_bonnet_audit",
    "conformal_chart",
    "harmonic_conjugate",
    "hopf",
    "associate_immersion",
    "conjugate_boundary_audit",
    "SurfaceComplex",
    "extend",
    "build_sigma_alpha_k",
    "build_sigma_alpha",
    "build_sigma_k",
    "embeddedness_check",
    "seam_continuity_check",
    "RunConfig",
    "load_config",
    "H2xrError",
    "DomainError",
    "DegenerateInputError",
    "MeshCapacityError",
    "ConvergenceError",
    "SolverIntegrityError",
    "ChartError",
    "PeriodError",
    "IntegrationError",
    "SeamError",
    "ConfigError",
    "AuditGateError",
]
