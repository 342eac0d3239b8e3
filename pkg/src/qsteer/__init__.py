"""Quantum steering ellipsoids of two-qubit states."""

from .discord import concurrence, discord_numeric, theta_family, zero_discord_A, zero_discord_B_check
from .ellipsoid import SteeringEllipsoid, ellipsoid_A, ellipsoid_B, volume_from_ellipsoid, volume_from_rho
from .errors import SteeringError
from .lorentz import boost, canonical_state
from .qstate import DensityMatrix, ThetaMatrix, bell_phi_plus, from_theta, mixture, random_density, to_theta, werner
from .reconstruct import GeometricData, extract_geometry, reconstruct_state
from .separability import classify_entanglement, decompose_separable, is_entangled_ppt, minimal_product_count
from .steering import Povm, complete_steering_check, steer

__all__ = [
    "DensityMatrix", "ThetaMatrix", "GeometricData", "SteeringEllipsoid", "Povm", "SteeringError",
    "to_theta", "from_theta", "random_density", "werner", "bell_phi_plus", "mixture",
    "boost", "canonical_state", "ellipsoid_A", "ellipsoid_B", "volume_from_ellipsoid", "volume_from_rho",
    "steer", "complete_steering_check", "classify_entanglement", "is_entangled_ppt",
    "decompose_separable", "minimal_product_count", "extract_geometry", "reconstruct_state",
    "concurrence", "discord_numeric", "theta_family", "zero_discord_A", "zero_discord_B_check",
]
