"""Spherical Bessel and Hankel functions of complex argument.

``j_n`` uses Miller's downward recurrence normalised to ``j_0`` or ``j_1``;
``h_n`` (first kind) uses upward recurrence from closed forms, which is stable
for the outgoing solution. Both return every order ``0..nmax`` at once.
"""

from __future__ import annotations

import numpy as np

_BIG = 1e100


def spherical_jn_all(nmax: int, z) -> np.ndarray:
    """``j_n(z)`` for ``n = 0..nmax``; result has shape ``(nmax + 1,) + z.shape``."""
    z_in = np.asarray(z, dtype=complex)
    if np.any(z_in == 0):
        raise ValueError("z = 0 is not supported")
    z = z_in.reshape(-1)
    top = max(nmax, 1)
    start = top + int(np.max(np.abs(z), initial=0.0)) + 40
    out = np.zeros((top + 1,) + z.shape, dtype=complex)
    f_up = np.zeros(z.shape, dtype=complex)
    f = np.full(z.shape, 1e-30, dtype=complex)
    for k in range(start, 0, -1):
        f_down = (2 * k + 1) / z * f - f_up
        f_up, f = f, f_down
        if k - 1 <= top:
            out[k - 1] = f
        big = np.abs(f) > _BIG
        if np.any(big):
            f[big] /= _BIG
            f_up[big] /= _BIG
            out[:, big] /= _BIG
    j0 = np.sin(z) / z
    j1 = np.sin(z) / z**2 - np.cos(z) / z
    use0 = np.abs(j0) >= np.abs(j1)
    scale = np.where(use0, j0 / np.where(use0, out[0], 1.0), j1 / np.where(use0, 1.0, out[1]))
    return (out * scale)[: nmax + 1].reshape((nmax + 1,) + z_in.shape)


def spherical_h1_all(nmax: int, z) -> np.ndarray:
    """Outgoing spherical Hankel ``h_n^(1)(z)`` for ``n = 0..nmax``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("z = 0 is not supported")
    out = np.empty((max(nmax, 1) + 1,) + z.shape, dtype=complex)
    e = np.exp(1j * z)
    out[0] = -1j * e / z
    out[1] = -e * (z + 1j) / z**2
    for n in range(1, nmax):
        out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    return out[: nmax + 1]


def riccati(n: int, z, kind: str):
    """Riccati-Bessel function and its first two derivatives at ``z``.

    ``kind="psi"`` gives ``z j_n(z)``, ``kind="xi"`` gives ``z h_n^(1)(z)``.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    z = np.asarray(z, dtype=complex)
    b = spherical_jn_all(n, z) if kind == "psi" else spherical_h1_all(n, z)
    f = z * b[n]
    df = z * b[n - 1] - n * b[n]
    d2f = (n * (n + 1) / z**2 - 1.0) * f
    return f, df, d2f


def radial(n: int, z, kind: str):
    """``z_n(z)`` and ``d(z z_n)/dz / z`` for the interior (``j``) or exterior (``h``) solution."""
    z = np.asarray(z, dtype=complex)
    b = spherical_jn_all(n, z) if kind == "j" else spherical_h1_all(n, z)
    zn = b[n]
    deriv = b[n - 1] - n * b[n] / z
    return zn, deriv
