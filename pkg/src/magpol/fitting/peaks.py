"""Peak detection on dB traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

HALF_POWER_DB = 10 * np.log10(2.0)


@dataclass(frozen=True)
class Peak:
    freq: float
    height: float        # dB
    width: float         # Hz, full width 3 dB below the maximum
    prominence: float    # dB


class PeakList(list):
    """Peaks sorted by ascending frequency."""

    @property
    def freqs(self) -> np.ndarray:
        return np.array([p.freq for p in self])


def _half_power_width(f: np.ndarray, y: np.ndarray, i: int) -> float:
    level = y[i] - HALF_POWER_DB
    edges = []
    for direction in (-1, 1):
        k = i
        while 0 <= k + direction < y.size and y[k + direction] > level:
            if y[k + direction] > y[i]:
                break
            k += direction
        nxt = k + direction
        if 0 <= nxt < y.size and y[nxt] <= level:
            # linear interpolation between k and nxt
            t = (y[k] - level) / (y[k] - y[nxt])
            edges.append(f[k] + t * (f[nxt] - f[k]))
        else:
            edges.append(f[k])
    return float(edges[1] - edges[0])


def refine_peak(f: np.ndarray, y: np.ndarray, i: int) -> float:
    """Parabolic interpolation of the maximum through three neighbouring samples."""
    if i == 0 or i == y.size - 1:
        return float(f[i])
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2 * y1 + y2
    if denom >= 0:
        return float(f[i])
    shift = 0.5 * (y0 - y2) / denom
    shift = float(np.clip(shift, -0.5, 0.5))
    step = f[i + 1] - f[i] if shift > 0 else f[i] - f[i - 1]
    return float(f[i] + shift * step)


def find_peaks(freq, db, min_prominence: float, refine: bool = False,
               min_height: float | None = None) -> PeakList:
    """Local maxima of a dB trace whose prominence is at least ``min_prominence`` dB.

    ``min_height`` (dB) additionally drops peaks below an absolute level.
    """
    f = np.asarray(freq, dtype=float)
    y = np.asarray(db, dtype=float)
    if f.shape != y.shape or f.ndim != 1:
        raise ValueError("frequency and dB arrays must be 1-D and the same length")
    if f.size < 3:
        raise ValueError("trace needs at least 3 points")
    if np.any(np.diff(f) <= 0):
        raise ValueError("trace must be sorted by strictly increasing frequency")
    idx, props = _scipy_find_peaks(y, prominence=min_prominence, height=min_height)
    out = PeakList()
    for i, prom in zip(idx, props["prominences"]):
        if prom <= 0:
            continue
        fi = refine_peak(f, y, i) if refine else float(f[i])
        out.append(Peak(fi, float(y[i]), _half_power_width(f, y, i), float(prom)))
    return out
