"""Measured values for the 5 mm YIG sphere, kept as golden data.

Rows store the numbers exactly as printed (full widths and full splittings in
the ``/pi`` convention). Use :func:`photon_modes` and :func:`couplings` to get
values in the internal half-width convention.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model_core import MagnonBranch, PhotonMode


@dataclass(frozen=True)
class MeasuredMode:
    label: str
    freq_hz: float          # asymptotic frequency at 7 T
    width_over_pi_hz: float
    g_over_pi_hz: float
    cooperativity: float
    cooperativity_err: float
    g_over_omega_pct: float
    filling_factor: float
    chi_eff: float


TABLE = (
    MeasuredMode("x", 12.779e9, 11.84e6, 4.79e9, 5.97e5, 1.85e5, 18.7, 0.221, 0.159),
    MeasuredMode("i", 15.506e9, 1.029e6, 7.11e9, 151e5, 47.0e5, 22.9, 0.594, 0.0885),
    MeasuredMode("ii", 15.563e9, 1.197e6, 4.19e9, 45.2e5, 14.0e5, 13.5, 0.594, 0.0305),
    MeasuredMode("1", 15.732e9, 5.355e6, 6.15e9, 21.8e5, 6.76e5, 19.5, 0.728, 0.0525),
    MeasuredMode("2", 15.893e9, 2.965e6, 3.04e9, 9.60e5, 2.98e5, 9.56, 0.493, 0.0185),
    MeasuredMode("3", 15.950e9, 2.965e6, 0.78e9, 0.632e5, 0.196e5, 2.45, 0.493, 0.00121),
)

MAGNON_WIDTH_OVER_PI_HZ = 3.247e6
MAGNON_WIDTH_SD_OVER_PI_HZ = 0.493e6

# Slope that puts the magnon on mode 1 (15.732 GHz) at 0.6425 T.
MAGNON_SLOPE_HZ_PER_T = 24.49e9
NOMINAL_GRADIENT_HZ_PER_T = 28e9
MSAT_TESLA = 0.178

# Mode comparison with the finite-element model (frequencies in Hz).
FEM_COMPARISON = (
    ("x", 12.779e9, 12.785e9, (0, 0)),
    ("i & ii", 15.534e9, 15.286e9, (1, 1)),
    ("1", 15.732e9, 15.736e9, (1, 0)),
    ("2 & 3", 15.922e9, 15.921e9, (1, 1)),
)

EPSILON_YIG = 15.96
EPSILON_YIG_ERR = 0.02
SPHERE_RADIUS_M = 2.5e-3


def by_label(label: str) -> MeasuredMode:
    for row in TABLE:
        if row.label == label:
            return row
    raise KeyError(label)


def photon_modes() -> list[PhotonMode]:
    return [PhotonMode(r.label, r.freq_hz, r.width_over_pi_hz / 2) for r in TABLE]


def couplings() -> list[float]:
    """Per-mode ``g`` (half the splitting) in Hz."""
    return [r.g_over_pi_hz / 2 for r in TABLE]


def magnon_branch(slope: float = MAGNON_SLOPE_HZ_PER_T, offset: float = 0.0) -> MagnonBranch:
    return MagnonBranch(slope, offset, MAGNON_WIDTH_OVER_PI_HZ / 2, msat=MSAT_TESLA)


def six_mode_system(port_fraction: float = 0.9, slope: float = MAGNON_SLOPE_HZ_PER_T):
    """All six measured modes, each with its own copy of the magnon branch.

    The coupling matrix is diagonal, so each photon mode sees one magnon with
    its measured ``g``; every photon is coupled to both ports with
    ``port_fraction * gamma_half``.
    """
    import numpy as np

    from .coupled_modes import CoupledSystem

    photons = photon_modes()
    widths = np.array([p.gamma_half for p in photons])
    magnons = [magnon_branch(slope) for _ in photons]
    return CoupledSystem(photons, magnons, np.diag(couplings()),
                         port_in=port_fraction * widths, port_out=port_fraction * widths)
