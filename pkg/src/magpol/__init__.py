"""Photon-magnon coupling in dielectric ferrimagnetic spheres: simulation and analysis."""

from .coupled_modes import (
    CoupledSystem,
    TransmissionMap,
    eigenfrequencies,
    eigenfrequency_sweep,
    s21,
    transmission_map,
    two_mode_branches,
)
from .model_core import (
    DerivedModeReport,
    MagnonBranch,
    PermeabilityParams,
    PhotonMode,
    SphereModeId,
    chi_eff,
    cooperativity,
    cooperativity_uncertainty,
    coupling_ratio,
    derived_report,
    effective_permeabilities,
    hybrid_linewidth,
    magnon_frequency,
    permeability_tensor,
    unperturbed_susceptibility,
)

__version__ = "0.1.0"

__all__ = [
    "CoupledSystem", "TransmissionMap", "eigenfrequencies", "eigenfrequency_sweep", "s21",
    "transmission_map", "two_mode_branches",
    "DerivedModeReport", "MagnonBranch", "PermeabilityParams", "PhotonMode", "SphereModeId",
    "chi_eff", "cooperativity", "cooperativity_uncertainty", "coupling_ratio", "derived_report",
    "effective_permeabilities", "hybrid_linewidth", "magnon_frequency", "permeability_tensor",
    "unperturbed_susceptibility",
]
