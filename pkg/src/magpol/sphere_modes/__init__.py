"""Analytic dielectric-sphere resonator: modes, fields, filling factors, permittivity."""

from .filling import QuadratureError, energy_ratio, filling_factor
from .modes import (
    RootCountError,
    SphereMode,
    characteristic_value,
    field_at,
    find_roots,
    mode_root,
    solve_modes,
)
from .permittivity import BracketError, PermittivityFit, extract_permittivity
from .roots import MissedRootWarning

__all__ = [
    "BracketError",
    "MissedRootWarning",
    "PermittivityFit",
    "QuadratureError",
    "RootCountError",
    "SphereMode",
    "characteristic_value",
    "energy_ratio",
    "extract_permittivity",
    "field_at",
    "filling_factor",
    "find_roots",
    "mode_root",
    "solve_modes",
]
