"""Lie-Taylor coefficient hierarchies and the Dolzhansky-Kirchhoff ellipsoid model."""
from .dk_dynamics import DKState, InvariantSet, ParameterSchedule, invariants, make_rhs
from .geometry import EllipsoidGeometry, basis_set, geometry_from_axes, geometry_from_moments
from .integrator import IntegrationSettings, Trajectory, first_zero_crossing, integrate
from .stability import aligned_spectrum, orthogonal_modes, potential_coefficients
from .taylor_hierarchy import (
    ScalarHierarchy,
    TaylorHierarchy,
    bracket_linear,
    diagnostics,
    hierarchy_rhs,
    mass_hierarchy_rhs,
)

__version__ = "0.1.0"
