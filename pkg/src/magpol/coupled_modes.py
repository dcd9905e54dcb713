"""Coupled photon-magnon modes and two-port transmission maps."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model_core import MagnonBranch, PhotonMode, magnon_frequency


@dataclass(frozen=True)
class CoupledSystem:
    """N photon modes coupled to M magnon branches.

    ``g`` is an (N, M) array of couplings in Hz; ``port_in``/``port_out`` are
    the external coupling rates of each photon mode. When the ports are not
    given every mode is coupled with ``gamma_half / 2`` on each side.
    """

    photons: tuple
    magnons: tuple
    g: np.ndarray
    port_in: Optional[np.ndarray] = None
    port_out: Optional[np.ndarray] = None

    def __post_init__(self):
        photons = tuple(self.photons)
        magnons = tuple(self.magnons)
        if not photons or not magnons:
            raise ValueError("need at least one photon mode and one magnon branch")
        labels = [p.label for p in photons]
        if len(set(labels)) != len(labels):
            raise ValueError("photon mode labels must be unique")
        g = np.array(self.g, dtype=float).reshape(len(photons), len(magnons))
        if np.any(g < 0):
            raise ValueError("couplings must be >= 0")
        widths = np.array([p.gamma_half for p in photons])
        k_in = widths / 2 if self.port_in is None else np.array(self.port_in, dtype=float)
        k_out = widths / 2 if self.port_out is None else np.array(self.port_out, dtype=float)
        if k_in.shape != widths.shape or k_out.shape != widths.shape:
            raise ValueError("one port rate per photon mode is required")
        if np.any(k_in < 0) or np.any(k_out < 0):
            raise ValueError("port rates must be >= 0")
        if np.any(k_in + k_out > 2 * widths * (1 + 1e-12)):
            raise ValueError("external loss exceeds total loss for some mode")
        for name, value in (("photons", photons), ("magnons", magnons), ("g", g),
                            ("port_in", k_in), ("port_out", k_out)):
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_photons(self) -> int:
        return len(self.photons)

    @property
    def n_magnons(self) -> int:
        return len(self.magnons)

    def photon_freqs(self) -> np.ndarray:
        return np.array([p.omega for p in self.photons])

    def photon_widths(self) -> np.ndarray:
        return np.array([p.gamma_half for p in self.photons])

    def magnon_freqs(self, b: float) -> np.ndarray:
        return np.array([magnon_frequency(m, b) for m in self.magnons])

    def magnon_widths(self) -> np.ndarray:
        return np.array([m.gamma_half for m in self.magnons])

    def matrix(self, b: float) -> np.ndarray:
        """Complex symmetric (N+M) square matrix whose eigenvalues are the hybrid modes."""
        n, m = self.n_photons, self.n_magnons
        diag = np.concatenate([
            self.photon_freqs() - 1j * self.photon_widths(),
            self.magnon_freqs(b) - 1j * self.magnon_widths(),
        ])
        mat = np.diag(diag).astype(complex)
        mat[:n, n:] = self.g
        mat[n:, :n] = self.g.T
        return mat


def two_mode_branches(omega_c, omega_m, g):
    """Upper and lower branch of two coupled oscillators (Hz in, Hz out)."""
    omega_c = np.asarray(omega_c, dtype=float)
    omega_m = np.asarray(omega_m, dtype=float)
    mean = 0.5 * (omega_c + omega_m)
    s = np.sqrt((0.5 * (omega_c - omega_m)) ** 2 + np.asarray(g, dtype=float) ** 2)
    upper, lower = mean + s, mean - s
    if upper.ndim == 0:
        return float(upper), float(lower)
    return upper, lower


def eigenfrequencies(sys: CoupledSystem, b: float) -> np.ndarray:
    """Complex hybrid eigenfrequencies at field ``b``, sorted by real part descending.

    The imaginary part is minus the half linewidth.
    """
    vals = np.linalg.eigvals(sys.matrix(b))
    return vals[np.argsort(-vals.real, kind="stable")]


def eigenfrequency_sweep(sys: CoupledSystem, b_axis: Sequence[float]) -> np.ndarray:
    """Eigenfrequencies along a field sweep with branches kept continuous.

    Row ``k`` holds the eigenvalues at ``b_axis[k]``; column ``j`` follows one
    branch, matched to the previous field point by minimum total distance.
    """
    b_axis = np.asarray(b_axis, dtype=float)
    out = np.empty((b_axis.size, sys.n_photons + sys.n_magnons), dtype=complex)
    for k, b in enumerate(b_axis):
        vals = eigenfrequencies(sys, b)
        if k == 0:
            out[k] = vals
            continue
        cost = np.abs(out[k - 1][:, None] - vals[None, :])
        rows, cols = linear_sum_assignment(cost)
        out[k, rows] = vals[cols]
    return out


def _s21_grid(sys: CoupledSystem, b: float, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    wm = sys.magnon_freqs(b)
    gm = sys.magnon_widths()
    # (M, F) magnon response; eliminating the magnons leaves an (N, N) self-energy per frequency
    mag = 1.0 / (1j * (wm[:, None] - f[None, :]) + gm[:, None])
    wc = sys.photon_freqs()[:, None]
    gc = sys.photon_widths()[:, None]
    diag = 1j * (wc - f[None, :]) + gc
    a_in, a_out = np.sqrt(sys.port_in), np.sqrt(sys.port_out)
    if np.count_nonzero(sys.g, axis=1).max() <= 1 and np.count_nonzero(sys.g, axis=0).max() <= 1:
        # no magnon is shared between photons: the photon modes decouple
        denom = diag + (sys.g**2) @ mag
        return np.sum((a_in * a_out)[:, None] / denom, axis=0)
    self_energy = np.einsum("jm,km,mf->fjk", sys.g, sys.g, mag)
    idx = np.arange(sys.n_photons)
    self_energy[:, idx, idx] += diag.T
    x = np.linalg.solve(self_energy, np.broadcast_to(a_in, (f.size, sys.n_photons))[..., None])
    return x[..., 0] @ a_out


def s21(sys: CoupledSystem, b: float, f):
    """Complex transmission at field ``b`` and frequency ``f`` (scalar or array)."""
    out = _s21_grid(sys, b, np.atleast_1d(f))
    return complex(out[0]) if np.ndim(f) == 0 else out


@dataclass
class TransmissionMap:
    """S21 on a (field, frequency) grid; ``values[i, j]`` is at ``b_axis[i]``, ``f_axis[j]``."""

    b_axis: np.ndarray
    f_axis: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.b_axis = np.asarray(self.b_axis, dtype=float)
        self.f_axis = np.asarray(self.f_axis, dtype=float)
        self.values = np.asarray(self.values)
        if self.values.shape != (self.b_axis.size, self.f_axis.size):
            raise ValueError(
                f"grid shape {self.values.shape} does not match axes "
                f"({self.b_axis.size}, {self.f_axis.size})"
            )
        for name, ax in (("b_axis", self.b_axis), ("f_axis", self.f_axis)):
            if ax.size > 1 and np.any(np.diff(ax) <= 0):
                raise ValueError(f"{name} must be strictly increasing")

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def db(self) -> np.ndarray:
        """Magnitude in dB, ``20 log10 |S21|``."""
        if not self.is_complex:
            return np.asarray(self.values, dtype=float)
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.values))


def grid_noise(seed: int, column: int, n: int, amplitude: float) -> np.ndarray:
    """Complex Gaussian noise for one field column, rms magnitude ``amplitude``.

    The stream is keyed by ``(seed, column)`` so results do not depend on the
    order in which columns are evaluated.
    """
    rng = np.random.default_rng([int(seed), int(column)])
    z = rng.standard_normal((2, n))
    return amplitude * (z[0] + 1j * z[1]) / np.sqrt(2.0)


def transmission_map(
    sys: CoupledSystem,
    b_axis: Sequence[float],
    f_axis: Sequence[float],
    noise: float = 0.0,
    seed: int = 0,
    threads: int = 1,
    allow_single: bool = False,
) -> TransmissionMap:
    """Evaluate S21 over a field/frequency grid, optionally with additive noise."""
    b_axis = np.atleast_1d(np.asarray(b_axis, dtype=float))
    f_axis = np.atleast_1d(np.asarray(f_axis, dtype=float))
    if not allow_single and (b_axis.size < 2 or f_axis.size < 2):
        raise ValueError("each axis needs at least 2 points")
    if noise < 0:
        raise ValueError("noise amplitude must be >= 0")
    values = np.empty((b_axis.size, f_axis.size), dtype=complex)

    def column(i: int) -> None:
        row = _s21_grid(sys, b_axis[i], f_axis)
        if noise > 0:
            row = row + grid_noise(seed, i, f_axis.size, noise)
        values[i] = row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(column, range(b_axis.size)))
    else:
        for i in range(b_axis.size):
            column(i)
    meta = {"noise": float(noise), "seed": int(seed)}
    return TransmissionMap(b_axis, f_axis, values, meta)
