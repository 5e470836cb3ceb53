"""Geodesic Monte Carlo on embedded manifolds.

Ambient-coordinate Hamiltonian Monte Carlo with exact geodesic flows on the
sphere, Stiefel manifolds and the orthogonal group, a reflective simplex, and
products of these; plus the targets, tempering, diagnostics and experiment
plumbing built on top.
"""

from geomc.errors import (
    BoundaryError,
    ConfigError,
    DimensionError,
    DomainError,
    EssError,
    GeomcError,
    ManifoldError,
)
from geomc.manifolds import (
    AffineSubspace,
    Euclidean,
    OrthogonalGroup,
    PhasePoint,
    Product,
    ReflectiveSimplex,
    Sphere,
    Stiefel,
    geodesic_flow,
    reflective_flow,
    sample_velocity,
    simplex_to_sphere,
    sphere_to_simplex,
    tangent_project,
)
from geomc.sampler import (
    ChainTrace,
    GeodesicHMC,
    HmcConfig,
    RwMetropolisSimplex,
    SphericalRandomWalk,
    Transition,
    hmc_transition,
    integrator_step,
    run_chain,
)
from geomc.tempering import TemperatureLadder, Tempered, run_parallel_tempering
from geomc.diagnostics import EssReport, ess, summarize

__version__ = "0.1.0"
