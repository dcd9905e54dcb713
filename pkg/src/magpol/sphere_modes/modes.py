"""Eigenmodes of a dielectric sphere in free space.

Modes are the complex zeros of the Mie denominators in ``x = k0 a``. With
``n = sqrt(eps_r)``, ``psi_l(z) = z j_l(z)`` and ``xi_l(z) = z h_l(z)``:

    TE:  psi_l(n x) xi_l'(x) - n xi_l(x) psi_l'(n x) = 0
    TM:  n psi_l(n x) xi_l'(x) - xi_l(x) psi_l'(n x) = 0

which is the continuity of tangential E and H with a regular interior and an
outgoing exterior. Time dependence is ``exp(-i omega t)`` so radiating modes
have ``Im x < 0`` and ``Q = Re x / (-2 Im x)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import physical_constants
from scipy.special import lpmv

from ..model_core import SphereModeId
from .bessel import radial, riccati
from .roots import MissedRootWarning, Rect, roots_in_rect, winding_number

Z0 = physical_constants["characteristic impedance of vacuum"][0]


class RootCountError(RuntimeError):
    pass


@dataclass(frozen=True)
class SphereMode:
    id: SphereModeId
    freq: float
    q_rad: float
    ka: complex
    eps_r: float
    radius: float

    def member(self, m: int, parity: str = "cos") -> "SphereMode":
        """Degenerate partner with azimuthal order ``m`` and given parity."""
        new_id = SphereModeId(self.id.family, self.id.ell, self.id.q, m, parity)
        return SphereMode(new_id, self.freq, self.q_rad, self.ka, self.eps_r, self.radius)

    def members(self) -> list["SphereMode"]:
        """All ``2 ell + 1`` members of the degenerate multiplet."""
        out = [self.member(0, "cos")]
        for m in range(1, self.id.ell + 1):
            out += [self.member(m, "cos"), self.member(m, "sin")]
        return out


def _check(family: str, ell: int, eps_r: float) -> None:
    if family not in ("TE", "TM"):
        raise ValueError(f"family must be 'TE' or 'TM', got {family!r}")
    if ell < 1:
        raise ValueError("ell must be >= 1: there is no radiating l = 0 mode")
    if not eps_r > 1:
        raise ValueError("eps_r must be > 1")


def _terms(family, ell, eps_r, x):
    n = np.sqrt(eps_r)
    p, dp, d2p = riccati(ell, n * x, "psi")
    s, ds, d2s = riccati(ell, x, "xi")
    if family == "TE":
        a, b = p * ds, n * s * dp
        da = n * dp * ds + p * d2s
        db = n * ds * dp + n * n * s * d2p
    else:
        a, b = n * p * ds, s * dp
        da = n * n * dp * ds + n * p * d2s
        db = ds * dp + n * s * d2p
    return a, b, da, db


def characteristic_value(family: str, ell: int, eps_r: float, x):
    """Residual of the mode-matching condition at ``x = k0 a``; zero at eigenmodes."""
    _check(family, ell, eps_r)
    x = np.asarray(x, dtype=complex)
    if np.any(x == 0):
        raise ValueError("x must be nonzero")
    a, b, _, _ = _terms(family, ell, eps_r, x)
    out = a - b
    return complex(out) if out.ndim == 0 else out


def characteristic_derivative(family: str, ell: int, eps_r: float, x):
    _check(family, ell, eps_r)
    x = np.asarray(x, dtype=complex)
    _, _, da, db = _terms(family, ell, eps_r, x)
    out = da - db
    return complex(out) if out.ndim == 0 else out


def relative_residual(family: str, ell: int, eps_r: float, x: complex) -> float:
    a, b, _, _ = _terms(family, ell, eps_r, np.asarray(x, dtype=complex))
    return float(abs(a - b) / (abs(a) + abs(b)))


def find_roots(
    family: str,
    ell: int,
    eps_r: float,
    x_max: float,
    x_min: float = 0.05,
    q_min: float = 2.0,
    cell: float = 0.1,
    im_top: float = 0.02,
    strict: bool = False,
) -> list[complex]:
    """Zeros of the characteristic function with ``x_min < Re x < x_max`` and ``Q >= q_min``.

    The strip is cut into cells of width ``cell``; each cell spans
    ``Im x`` from ``-x1 / (2 q_min)`` to ``im_top``. A winding count is taken on
    every cell and compared with the number of polished zeros found in it.
    """
    _check(family, ell, eps_r)

    def f(z):
        return characteristic_value(family, ell, eps_r, z)

    def df(z):
        return characteristic_derivative(family, ell, eps_r, z)

    # irrational offsets keep cell edges away from exact lattice points
    edges = np.arange(x_min, x_max + cell, cell) + cell * 0.0137
    edges[0] = x_min
    edges = edges[edges < x_max]
    edges = np.append(edges, x_max)
    found: list[complex] = []
    for x0, x1 in zip(edges[:-1], edges[1:]):
        rect = Rect(x0, x1, -x1 / (2 * q_min) - 1e-3 * np.pi, im_top)
        expected = int(round(winding_number(f, rect)))
        roots, unresolved = roots_in_rect(f, df, rect)
        if expected != len(roots) or unresolved:
            msg = (f"{family}{ell}: cell Re x in [{x0:.4f}, {x1:.4f}] winds {expected} "
                   f"but {len(roots)} zeros were polished")
            if strict:
                raise RootCountError(msg)
            warnings.warn(msg, MissedRootWarning, stacklevel=2)
        found += roots
    found = [z for z in found if z.real > 0 and z.imag < 0 and z.real / (-2 * z.imag) >= q_min]
    found.sort(key=lambda z: z.real)
    dedup: list[complex] = []
    for z in found:
        if not dedup or abs(z - dedup[-1]) > 1e-9 * abs(z):
            dedup.append(z)
    return dedup


def _to_mode(family, ell, q, x, eps_r, radius) -> SphereMode:
    freq = x.real * C_LIGHT / (2 * np.pi * radius)
    return SphereMode(SphereModeId(family, ell, q), freq, x.real / (-2 * x.imag), complex(x), eps_r, radius)


def solve_modes(
    eps_r: float,
    radius_m: float,
    f_band: tuple[float, float],
    ell_max: int,
    families: Iterable[str] = ("TE", "TM"),
    q_min: float = 2.0,
    cell: float = 0.1,
    strict: bool = False,
) -> list[SphereMode]:
    """All modes with ``Q >= q_min`` whose frequency lies in ``f_band``, sorted by frequency.

    Radial indices count every root from the bottom of the spectrum, so a mode
    keeps its ``q`` label whatever band is requested.
    """
    f_lo, f_hi = f_band
    if not 0 < f_lo < f_hi:
        raise ValueError("band must be positive and ordered")
    if ell_max < 1:
        raise ValueError("ell_max must be >= 1")
    if radius_m <= 0:
        raise ValueError("radius must be positive")
    x_hi = 2 * np.pi * f_hi * radius_m / C_LIGHT
    modes = []
    for family in families:
        for ell in range(1, ell_max + 1):
            roots = find_roots(family, ell, eps_r, x_hi * 1.02 + cell, q_min=q_min, cell=cell, strict=strict)
            for q, x in enumerate(roots, start=1):
                mode = _to_mode(family, ell, q, x, eps_r, radius_m)
                if f_lo <= mode.freq <= f_hi:
                    modes.append(mode)
    modes.sort(key=lambda m: m.freq)
    return modes


def track_root(family: str, ell: int, eps_from: float, x_from: complex, eps_to: float,
               steps: int = 8) -> complex:
    """Follow one root as ``eps_r`` changes, using Newton at each continuation step."""
    from .roots import newton

    x = complex(x_from)
    for k, eps in enumerate(np.linspace(eps_from, eps_to, steps + 1)[1:], start=1):
        prev_eps = eps_from + (eps_to - eps_from) * (k - 1) / steps
        x *= np.sqrt(prev_eps / eps)

        def f(z, eps=eps):
            return characteristic_value(family, ell, eps, z)

        def df(z, eps=eps):
            return characteristic_derivative(family, ell, eps, z)

        x, ok = newton(f, df, x)
        if not ok:
            raise RuntimeError(f"lost root {family}{ell} while tracking to eps_r={eps:.6g}")
    return x


def mode_root(family: str, ell: int, q: int, eps_r: float, q_min: float = 2.0) -> complex:
    """``k0 a`` of the ``q``-th root of ``(family, ell)`` at ``eps_r``."""
    x_max = 1.0
    while True:
        roots = find_roots(family, ell, eps_r, x_max, q_min=q_min)
        if len(roots) >= q:
            return roots[q - 1]
        x_max *= 2
        if x_max > 200:
            raise RuntimeError(f"no root {family}{ell} q={q} below x=200")


# -- fields -----------------------------------------------------------------

def _angular(ell: int, m: int, theta):
    """``P(cos theta)``, ``dP/dtheta`` and ``m P / sin theta`` with the Condon-Shortley phase."""
    x = np.cos(theta)
    p = lpmv(m, ell, x)
    if m == 0:
        dp = lpmv(1, ell, x)
        p_over_sin = np.zeros_like(p)
    else:
        dp = 0.5 * (lpmv(m + 1, ell, x) - (ell + m) * (ell - m + 1) * lpmv(m - 1, ell, x))
        p_over_sin = -0.5 * (lpmv(m + 1, ell - 1, x) + (ell + m - 1) * (ell + m) * lpmv(m - 1, ell - 1, x))
    return p, dp, p_over_sin


def field_at(mode: SphereMode, r, theta, phi, radius_m: float | None = None):
    """E (V/m) and H (A/m) in spherical components ``(r, theta, phi)``.

    ``mode.id`` selects the multiplet member. The interior amplitude is fixed to
    one; the exterior amplitude follows from continuity at ``r = radius``.
    Arrays broadcast; output shapes are ``(3,) + broadcast shape``.
    """
    a = mode.radius if radius_m is None else radius_m
    fam, ell, m, parity = mode.id.family, mode.id.ell, mode.id.m, mode.id.parity
    r, theta, phi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, theta, phi)))
    n = np.sqrt(mode.eps_r)
    x = mode.ka
    k0 = x / a

    if parity == "cos":
        t, dt = np.cos(m * phi), -m * np.sin(m * phi)
    else:
        t, dt = np.sin(m * phi), m * np.cos(m * phi)
    p, dp, p_over_sin = _angular(ell, m, theta)
    # (1/sin theta) dY/dphi with the pole limit handled by p_over_sin
    y = p * t
    y_theta = dp * t
    y_phi_sin = p_over_sin * (dt / m if m else 0.0)

    inside = r <= a
    k = np.where(inside, n * k0, k0)
    at_origin = r == 0
    rho = k * np.where(at_origin, a, r)
    zin, dzin = radial(ell, np.where(inside, rho, 1.0), "j")
    zout, dzout = radial(ell, np.where(inside, 1.0, rho), "h")
    zin1, _ = radial(ell, n * x, "j")
    zout1, _ = radial(ell, x, "h")
    amp_out = zin1 / zout1 if fam == "TE" else n * zin1 / zout1
    index = np.where(inside, n, 1.0)
    # j_l(0) = 0 for l >= 1
    zl = np.where(at_origin, 0.0, np.where(inside, zin, amp_out * zout))
    dzl = np.where(inside, dzin, amp_out * dzout)

    # M = curl(r z Y), N = curl(M) / k
    m_vec = np.stack([np.zeros_like(zl), zl * y_phi_sin, -zl * y_theta])
    with np.errstate(invalid="ignore", divide="ignore"):
        z_over_rho = zl / rho
        n_vec = np.stack([ell * (ell + 1) * z_over_rho * y, dzl * y_theta, dzl * y_phi_sin])
    if np.any(at_origin):
        # regular solution: only l = 1 survives at the origin, with z/rho -> 1/3
        lim = 1.0 / 3.0 if ell == 1 else 0.0
        n_vec[0] = np.where(at_origin, ell * (ell + 1) * lim * y, n_vec[0])
        n_vec[1] = np.where(at_origin, 2 * lim * y_theta, n_vec[1])
        n_vec[2] = np.where(at_origin, 2 * lim * y_phi_sin, n_vec[2])
    if fam == "TE":
        e = m_vec
        h = -1j * index * n_vec / Z0
    else:
        e = n_vec
        h = -1j * index * m_vec / Z0
    return e, h


def multiplet_degeneracy(modes: Sequence[SphereMode]) -> dict:
    """Map ``(family, ell, q)`` to the number of multiplet members it represents."""
    return {(m.id.family, m.id.ell, m.id.q): 2 * m.id.ell + 1 for m in modes}
