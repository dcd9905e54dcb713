"""Fano lineshape fits and linewidth statistics.

Lineshape::

    F(f) = amplitude * (q * gamma / 2 + f - f0)**2 / ((gamma / 2)**2 + (f - f0)**2) + offset

``gamma`` is the full width in Hz; for ``|q| -> inf`` the shape tends to a
Lorentzian of full width ``gamma``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .lm import FitError, levenberg_marquardt
from .peaks import find_peaks

PARAM_NAMES = ("f0", "gamma", "q_fano", "amplitude", "offset")


@dataclass(frozen=True)
class FanoParams:
    f0: float
    gamma: float
    q_fano: float
    amplitude: float
    offset: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")

    def as_array(self) -> np.ndarray:
        return np.array([self.f0, self.gamma, self.q_fano, self.amplitude, self.offset])


@dataclass
class FanoFit:
    params: FanoParams
    stderr: dict
    residual_rms: float
    iterations: int
    converged: bool = True
    message: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "params": {k: {"value": v, "stderr": self.stderr[k]} for k, v in asdict(self.params).items()},
            "residual_rms": self.residual_rms,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
        }


def fano(f, f0, gamma, q_fano, amplitude, offset):
    d = np.asarray(f, dtype=float) - f0
    h = 0.5 * gamma
    return amplitude * (q_fano * h + d) ** 2 / (h * h + d * d) + offset


def _jacobian(f, p):
    f0, gamma, q, amp, _ = p
    d = f - f0
    h = 0.5 * gamma
    num = (q * h + d) ** 2
    den = h * h + d * d
    dn_dd = 2 * (q * h + d)
    j = np.empty((f.size, 5))
    j[:, 0] = -amp * (dn_dd * den - num * 2 * d) / den**2
    j[:, 1] = 0.5 * amp * (dn_dd * q * den - num * 2 * h) / den**2
    j[:, 2] = amp * dn_dd * h / den
    j[:, 3] = num / den
    j[:, 4] = 1.0
    return j


def _canonical(p: np.ndarray) -> np.ndarray:
    """Map an equivalent parameter set onto ``gamma > 0``, ``amplitude >= 0``."""
    f0, gamma, q, amp, off = p
    if gamma < 0:
        gamma, q = -gamma, -q
    if amp < 0 and q != 0:
        amp, q, off = -amp * q * q, -1.0 / q, off + amp * (1 + q * q)
    return np.array([f0, gamma, q, amp, off])


def seed_fano(freq, y, q_fano: float = 10.0) -> FanoParams:
    """Initial guess from the tallest peak of a linear trace."""
    f = np.asarray(freq, dtype=float)
    y = np.asarray(y, dtype=float)
    i = int(np.argmax(y))
    base = float(np.min(y))
    half = base + 0.5 * (y[i] - base)
    above = np.nonzero(y >= half)[0]
    width = max(float(f[above[-1]] - f[above[0]]), float(f[1] - f[0]))
    amp = (y[i] - base) / (1 + q_fano**2)
    return FanoParams(float(f[i]), width, q_fano, max(amp, 0.0), base)


Q_SEEDS = (10.0, -10.0, 2.0, -2.0, 0.5, -0.5)


def _fit_once(f, y, init: FanoParams, max_iter: int):
    p0 = init.as_array()
    scale = np.array([max(init.gamma, 1.0), max(init.gamma, 1.0), max(abs(init.q_fano), 1.0),
                      max(init.amplitude, 1e-12), max(abs(init.offset), init.amplitude, 1e-12)])

    def resid(p):
        return fano(f, *p) - y

    res = levenberg_marquardt(resid, p0, jac=lambda p: _jacobian(f, p), max_iter=max_iter, x_scale=scale)
    p = _canonical(res.params)
    if not np.allclose(p, res.params):
        res = levenberg_marquardt(resid, p, jac=lambda p: _jacobian(f, p), max_iter=max_iter, x_scale=scale)
    return res


def fit_fano(freq, y, init: Optional[FanoParams] = None, max_iter: int = 200) -> FanoFit:
    """Least-squares Fano fit to a linear trace.

    Without ``init`` the fit is started from a Lorentzian-like seed at each of
    a fixed set of asymmetries and the lowest-cost converged result is kept.
    Raises :class:`FitError` (with the last iterate attached) when no start
    converges or the Jacobian is singular.
    """
    f = np.asarray(freq, dtype=float)
    y = np.asarray(y, dtype=float)
    if f.size < 6:
        raise FitError("need at least 6 samples for a 5-parameter fit")
    if init is not None:
        starts = [init]
    else:
        base = seed_fano(f, y)
        starts = [seed_fano(f, y, q) for q in Q_SEEDS]
        starts = [FanoParams(base.f0, base.gamma, s.q_fano, s.amplitude, s.offset) for s in starts]
    best, last_error = None, None
    for start in starts:
        try:
            res = _fit_once(f, y, start, max_iter)
        except FitError as exc:
            last_error = exc
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None:
        raise last_error
    p = _canonical(best.params)
    params = FanoParams(*map(float, p))
    stderr = dict(zip(PARAM_NAMES, map(float, best.stderr)))
    rms = float(np.sqrt(np.mean(best.residuals**2)))
    return FanoFit(params, stderr, rms, best.iterations, best.converged, best.message)


def linewidth_stats(fits: Sequence) -> tuple[float, float]:
    """Sample mean and sample standard deviation of the fitted full widths."""
    widths = np.array([(x.params if isinstance(x, FanoFit) else x).gamma for x in fits], dtype=float)
    if widths.size < 2:
        raise ValueError("need at least two fits")
    return float(widths.mean()), float(widths.std(ddof=1))


def fit_trace_peaks(
    freq,
    db,
    min_prominence: float = 6.0,
    window_widths: float = 6.0,
    power: bool = True,
) -> tuple[list[FanoFit], list[dict]]:
    """Fit every prominent peak of a dB trace with its own Fano lineshape.

    Each peak is fitted on a window of ``window_widths`` estimated widths either
    side, in linear power (``|S21|^2``) when ``power`` is set, else linear
    magnitude. Returns the fits and a list of per-peak failures.
    """
    f = np.asarray(freq, dtype=float)
    y_db = np.asarray(db, dtype=float)
    lin = 10 ** (y_db / 10) if power else 10 ** (y_db / 20)
    peaks = find_peaks(f, y_db, min_prominence)
    fits, failures = [], []
    for pk in peaks:
        half = window_widths * max(pk.width, 3 * (f[1] - f[0]))
        sel = (f >= pk.freq - half) & (f <= pk.freq + half)
        try:
            fit = fit_fano(f[sel], lin[sel])
            fit.extra["peak_freq"] = pk.freq
            fits.append(fit)
        except (FitError, ValueError) as exc:
            failures.append({"peak_freq": pk.freq, "error": str(exc)})
    return fits, failures
