"""Physical quantities and closed-form relations for photon-magnon coupling.

All rates are ordinary frequencies in Hz. Tabulated values quoted as ``x/pi``
(full widths, full splittings) are halved on ingest, so ``gamma_half`` is the
half linewidth and ``g`` is half of the on-resonance splitting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class SphereModeId:
    """Label of a dielectric-sphere eigenmode.

    ``family`` is ``"TE"`` or ``"TM"``, ``ell`` the angular index, ``q`` the
    radial root index, ``m`` the azimuthal order and ``parity`` selects the
    ``cos(m phi)`` or ``sin(m phi)`` member.
    """

    family: str
    ell: int
    q: int
    m: int = 0
    parity: str = "cos"

    def __post_init__(self):
        if self.family not in ("TE", "TM"):
            raise ValueError(f"family must be 'TE' or 'TM', got {self.family!r}")
        if self.ell < 1:
            raise ValueError("ell must be >= 1")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if abs(self.m) > self.ell:
            raise ValueError("|m| must not exceed ell")
        if self.parity not in ("cos", "sin"):
            raise ValueError("parity must be 'cos' or 'sin'")
        if self.m == 0 and self.parity == "sin":
            raise ValueError("m = 0 has no sin member")


@dataclass(frozen=True)
class PhotonMode:
    label: str
    omega: float
    gamma_half: float
    id: Optional[SphereModeId] = None

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"{self.label}: omega must be > 0")
        if not self.gamma_half > 0:
            raise ValueError(f"{self.label}: gamma_half must be > 0")


@dataclass(frozen=True)
class MagnonBranch:
    """Affine magnon dispersion ``f(B) = slope * B + offset``.

    ``msat`` (tesla) is carried along as metadata only.
    """

    slope: float
    offset: float
    gamma_half: float
    msat: Optional[float] = None

    def __post_init__(self):
        if not self.slope > 0:
            raise ValueError("magnon slope must be > 0")
        if not self.gamma_half > 0:
            raise ValueError("magnon gamma_half must be > 0")


@dataclass(frozen=True)
class PermeabilityParams:
    chi: float
    kappa: float

    def __post_init__(self):
        if not 1.0 + self.chi - abs(self.kappa) > 0:
            raise ValueError("1 + chi - |kappa| must be positive")


@dataclass(frozen=True)
class DerivedModeReport:
    label: str
    g_half_split: float
    cooperativity: float
    coupling_ratio: float
    chi_eff: Optional[float]
    filling_factor: Optional[float]

    def __post_init__(self):
        for name in ("g_half_split", "cooperativity", "coupling_ratio", "chi_eff", "filling_factor"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be >= 0")


def magnon_frequency(branch: MagnonBranch, b):
    """Magnon frequency in Hz at applied field ``b`` (tesla, scalar or array)."""
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise ValueError("field must be >= 0")
    out = branch.slope * b + branch.offset
    return float(out) if out.ndim == 0 else out


def cooperativity(g: float, gamma_mag: float, gamma_mode: float) -> float:
    """Cooperativity ``g**2 / (gamma_mag * gamma_mode)``.

    The ratio is homogeneous of degree zero, so any consistent width/splitting
    convention gives the same number.
    """
    if gamma_mag <= 0 or gamma_mode <= 0:
        raise ValueError("linewidths must be positive")
    if g < 0:
        raise ValueError("coupling must be >= 0")
    return g * g / (gamma_mag * gamma_mode)


def cooperativity_uncertainty(
    g: float,
    gamma_mag: float,
    gamma_mode: float,
    gamma_mag_sd: float,
    method: str = "linear",
) -> float:
    """Uncertainty of the cooperativity from the magnon linewidth spread.

    ``"linear"`` is first-order propagation, ``C * sd / gamma_mag``.
    ``"span"`` is the full spread ``C(gamma_mag - sd) - C(gamma_mag + sd)``,
    which is what the tabulated error column corresponds to.
    """
    c = cooperativity(g, gamma_mag, gamma_mode)
    if method == "linear":
        return c * gamma_mag_sd / gamma_mag
    if method == "span":
        if gamma_mag_sd >= gamma_mag:
            raise ValueError("linewidth spread must be smaller than the linewidth")
        return cooperativity(g, gamma_mag - gamma_mag_sd, gamma_mode) - cooperativity(
            g, gamma_mag + gamma_mag_sd, gamma_mode
        )
    raise ValueError(f"unknown method {method!r}")


def coupling_ratio(g_half_split: float, omega: float) -> float:
    if omega <= 0:
        raise ValueError("omega must be > 0")
    return g_half_split / omega


def chi_eff(g_half_split: float, omega: float, xi: float) -> float:
    """Effective susceptibility from ``g**2 = chi_eff * omega**2 * xi``."""
    if omega <= 0:
        raise ValueError("omega must be > 0")
    if not 0 < xi <= 1:
        raise ValueError("filling factor must lie in (0, 1]")
    return g_half_split**2 / (omega**2 * xi)


def unperturbed_susceptibility(chi_plus: float, chi_minus: float) -> float:
    """Standing-wave susceptibility seen by a doublet, the mean of chi+ and chi-."""
    if chi_plus < 0 or chi_minus < 0:
        raise ValueError("susceptibilities must be >= 0")
    return 0.5 * (chi_plus + chi_minus)


def permeability_tensor(p: PermeabilityParams) -> np.ndarray:
    """Gyrotropic relative permeability tensor (units of mu0), bias along z."""
    return np.array(
        [
            [1.0 + p.chi, -1j * p.kappa, 0.0],
            [1j * p.kappa, 1.0 + p.chi, 0.0],
            [0.0, 0.0, 1.0],
        ],
        dtype=complex,
    )


def effective_permeabilities(p: PermeabilityParams) -> tuple[float, float]:
    """Relative permeabilities ``(mu_plus, mu_minus)`` of the two circular polarisations."""
    return 1.0 + p.chi + p.kappa, 1.0 + p.chi - p.kappa


def hybrid_linewidth(gamma_mode: float, gamma_mag: float) -> float:
    """Linewidth of the on-resonance hybrid state (mean of the two widths)."""
    if gamma_mode <= 0 or gamma_mag <= 0:
        raise ValueError("linewidths must be positive")
    return 0.5 * (gamma_mode + gamma_mag)


def derived_report(
    mode: PhotonMode,
    g_half_split: float,
    gamma_mag_half: float,
    xi: Optional[float] = None,
) -> DerivedModeReport:
    return DerivedModeReport(
        label=mode.label,
        g_half_split=g_half_split,
        cooperativity=cooperativity(g_half_split, gamma_mag_half, mode.gamma_half),
        coupling_ratio=coupling_ratio(g_half_split, mode.omega),
        chi_eff=None if xi is None else chi_eff(g_half_split, mode.omega, xi),
        filling_factor=xi,
    )
