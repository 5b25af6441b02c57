"""Simulation and analysis of parabolic resonances in near-integrable two degree of freedom Hamiltonians."""

from .core import (
    DomainError,
    HamiltonianSystem,
    PhaseState,
    SphericalState,
    canonical_vector_field,
    to_reduced,
    to_spherical,
)
from .models import (
    AtmosphericModel,
    AtmosphericParams,
    CosCubedProfile,
    MechanicalModel,
    MechanicalParams,
    SinTwoGradientProfile,
)
from .integrate import IntegrationOptions, Trajectory, conservation_report, integrate

__version__ = "0.1.0"
