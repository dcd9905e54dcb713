"""Permittivity from a measured mode frequency."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.optimize import brentq

from .modes import mode_root, track_root


class BracketError(ValueError):
    """The frequency mismatch does not change sign over the permittivity range."""


@dataclass
class PermittivityFit:
    epsilon: float
    delta_f_curve: list = field(default_factory=list)   # (epsilon, f_sim - f_meas) pairs
    uncertainty: float = 0.0
    family: str = "TE"
    ell: int = 1
    q: int = 1
    f_meas: float = 0.0
    radius: float = 0.0


class ModeFrequency:
    """``f_sim(eps)`` for one ``(family, ell, q)`` root, cached along the eps axis."""

    def __init__(self, family: str, ell: int, q: int, eps_ref: float):
        self.family, self.ell, self.q = family, ell, q
        self._known = {float(eps_ref): mode_root(family, ell, q, eps_ref)}

    def ka(self, eps: float) -> complex:
        eps = float(eps)
        if eps in self._known:
            return self._known[eps]
        near = min(self._known, key=lambda e: abs(e - eps))
        steps = max(2, int(np.ceil(abs(eps - near) / 0.25)))
        x = track_root(self.family, self.ell, near, self._known[near], eps, steps=steps)
        self._known[eps] = x
        return x

    def __call__(self, eps: float, radius: float) -> float:
        return self.ka(eps).real * C_LIGHT / (2 * np.pi * radius)


def extract_permittivity(
    f_meas: float,
    mode: tuple[str, int, int],
    radius_m: float,
    eps_range: tuple[float, float],
    radius_tol: float = 0.0,
    n_curve: int = 41,
    f_tol: float = 1e3,
) -> PermittivityFit:
    """Permittivity at which the selected mode sits at ``f_meas``.

    The mismatch ``f_sim - f_meas`` is sampled over ``eps_range`` and its zero
    is bracketed and refined until it is below ``f_tol`` Hz. ``radius_tol`` is
    propagated by re-solving at ``radius_m +/- radius_tol``.
    """
    family, ell, q = mode
    lo, hi = eps_range
    if not 1 < lo < hi:
        raise ValueError("eps_range must satisfy 1 < lo < hi")
    fsim = ModeFrequency(family, ell, q, 0.5 * (lo + hi))

    eps_grid = np.linspace(lo, hi, n_curve)
    curve = [(float(e), fsim(e, radius_m) - f_meas) for e in eps_grid]

    def solve(radius: float) -> float:
        d_lo, d_hi = fsim(lo, radius) - f_meas, fsim(hi, radius) - f_meas
        if np.sign(d_lo) == np.sign(d_hi):
            raise BracketError(
                f"f_sim - f_meas keeps sign on [{lo}, {hi}] "
                f"({d_lo / 1e6:.3f} MHz .. {d_hi / 1e6:.3f} MHz)"
            )
        # df/deps ~ f / (2 eps), so an eps tolerance maps directly to f_tol
        xtol = 1e-3 * f_tol * 2 * hi / f_meas
        return brentq(lambda e: fsim(e, radius) - f_meas, lo, hi, xtol=xtol, rtol=1e-15)

    eps = solve(radius_m)
    unc = 0.0
    if radius_tol > 0:
        unc = 0.5 * abs(solve(radius_m + radius_tol) - solve(radius_m - radius_tol))
    return PermittivityFit(eps, curve, unc, family, ell, q, f_meas, radius_m)
