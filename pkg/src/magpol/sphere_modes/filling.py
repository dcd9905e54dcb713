"""Magnetic filling factor: share of |H|^2 energy that sits inside the sphere."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .modes import SphereMode, field_at


class QuadratureError(RuntimeError):
    pass


def _ball_integral(h_field: Callable, r0: float, r1: float, n_r: int, n_t: int, n_p: int) -> float:
    """Integral of ``|H|^2`` over the shell ``r0 < r < r1``.

    Gauss-Legendre in ``r`` and ``cos theta``; the trapezoid rule in ``phi`` is
    exact for the trigonometric polynomials the mode fields produce.
    """
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (r1 - r0) * xr + 0.5 * (r1 + r0)
    wr = wr * 0.5 * (r1 - r0)
    u, wu = np.polynomial.legendre.leggauss(n_t)
    theta = np.arccos(u)
    phi = 2 * np.pi * np.arange(n_p) / n_p
    wp = np.full(n_p, 2 * np.pi / n_p)
    rr, tt, pp = np.meshgrid(r, theta, phi, indexing="ij")
    h = h_field(rr, tt, pp)
    dens = np.sum(np.abs(h) ** 2, axis=0)
    w = (wr * r**2)[:, None, None] * wu[None, :, None] * wp[None, None, :]
    return float(np.sum(dens * w))


def energy_ratio(
    h_field: Callable,
    sphere_radius: float,
    domain_radius: float,
    n_phi: int = 8,
    n_start: int = 16,
    n_max: int = 256,
    rtol: float = 1e-6,
    fail_tol: float = 1e-4,
) -> float:
    """``int_sphere |H|^2 / int_ball |H|^2`` for an arbitrary field callable.

    ``h_field(r, theta, phi)`` returns the three components stacked on axis 0.
    Node counts in ``r`` and ``theta`` are doubled until two successive
    estimates agree to ``rtol``.
    """
    if domain_radius < sphere_radius:
        raise ValueError("domain radius must be at least the sphere radius")
    if domain_radius == sphere_radius:
        return 1.0
    n = n_start
    prev = None
    while True:
        inner = _ball_integral(h_field, 0.0, sphere_radius, n, n, n_phi)
        outer = _ball_integral(h_field, sphere_radius, domain_radius, n, n, n_phi)
        ratio = inner / (inner + outer)
        if prev is not None:
            change = abs(ratio - prev) / abs(ratio)
            if change < rtol:
                return ratio
            if 2 * n > n_max:
                if change > fail_tol:
                    raise QuadratureError(
                        f"filling factor not converged: node doubling changed it by {change:.2e}"
                    )
                return ratio
        prev = ratio
        n *= 2


def filling_factor(mode: SphereMode, domain_radius: float, sphere_radius: float | None = None,
                   **kwargs) -> float:
    """Magnetic filling factor of one multiplet member inside a ball of ``domain_radius``.

    ``mode.id`` picks ``m`` and parity. The exterior is the outgoing field of
    the resonance, so the ratio keeps decreasing slowly as the domain grows.
    """
    a = mode.radius if sphere_radius is None else sphere_radius
    n_phi = kwargs.pop("n_phi", max(8, 4 * mode.id.m + 4))

    def h(r, t, p):
        return field_at(mode, r, t, p, radius_m=a)[1]

    return energy_ratio(h, a, domain_radius, n_phi=n_phi, **kwargs)
