"""Ridge extraction: per-column peaks linked across field columns."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .peaks import find_peaks


@dataclass
class Ridge:
    """One branch polyline; ``b`` strictly increasing."""

    b: np.ndarray
    f: np.ndarray
    height: np.ndarray          # dB at each point

    def __len__(self) -> int:
        return int(self.b.size)

    def slope(self) -> np.ndarray:
        """Local df/dB by central differences (one-sided at the ends)."""
        if self.b.size < 2:
            return np.zeros(self.b.size)
        return np.gradient(self.f, self.b)


class _Track:
    __slots__ = ("cols", "b", "f", "h", "missed")

    def __init__(self, col, b, f, h):
        self.cols, self.b, self.f, self.h = [col], [b], [f], [h]
        self.missed = 0

    def predict(self, b: float, use_trend: bool) -> float:
        if not use_trend or len(self.b) < 2:
            return self.f[-1]
        rate = (self.f[-1] - self.f[-2]) / (self.b[-1] - self.b[-2])
        return self.f[-1] + rate * (b - self.b[-1])


def noise_floor(tmap) -> float:
    """Median dB level of the map, a robust stand-in for the background."""
    db = tmap.db()
    return float(np.median(db[np.isfinite(db)]))


def column_peaks(tmap, min_prominence: float, refine: bool = False,
                 min_height: Optional[float] = None) -> list:
    """``(freqs, heights)`` arrays of the peaks found in every field column."""
    db = tmap.db()
    out = []
    for i in range(tmap.b_axis.size):
        peaks = find_peaks(tmap.f_axis, db[i], min_prominence, refine=refine, min_height=min_height)
        out.append((np.array([p.freq for p in peaks]), np.array([p.height for p in peaks])))
    return out


def extract_ridges(
    tmap,
    min_prominence: float,
    refine: bool = False,
    max_jump: Optional[float] = None,
    max_gap: int = 2,
    min_points: int = 3,
    follow_trend: bool = True,
    min_height: Optional[float] = None,
) -> list[Ridge]:
    """Link per-column peaks of a transmission map into branch polylines.

    Each open ridge is matched to at most one peak in the next column by
    minimum total frequency distance (Hungarian assignment). With
    ``follow_trend`` the distance is measured from the ridge's linear
    continuation, otherwise from its last point; ties go to the straighter
    continuation. A ridge survives ``max_gap`` columns without a match.
    ``max_jump`` defaults to four frequency steps, so the field step must be
    fine enough that no branch moves further between columns. Ridges with fewer than
    ``min_points`` points are dropped. Peaks below ``min_height`` dB are
    ignored; by default that is ``min_prominence`` above the map's median
    level, which keeps background noise out.
    """
    f_axis, b_axis = tmap.f_axis, tmap.b_axis
    if max_jump is None:
        max_jump = 4 * float(np.median(np.diff(f_axis))) if f_axis.size > 1 else np.inf
    if min_height is None:
        min_height = noise_floor(tmap) + min_prominence
    peaks = column_peaks(tmap, min_prominence, refine, min_height)
    open_tracks: list[_Track] = []
    closed: list[_Track] = []
    for i, (freqs, heights) in enumerate(peaks):
        b = float(b_axis[i])
        used = np.zeros(freqs.size, dtype=bool)
        if open_tracks and freqs.size:
            pred = np.array([t.predict(b, follow_trend) for t in open_tracks])
            dist = np.abs(freqs[None, :] - pred[:, None])
            scale = max(max_jump, 1.0)
            last = np.array([t.f[-1] for t in open_tracks])
            before = np.array([t.f[-2] if len(t.f) > 1 else t.f[-1] for t in open_tracks])
            tie = np.abs(freqs[None, :] - 2 * last[:, None] + before[:, None])
            cost = dist + 1e-9 * scale * tie / (tie.max() + 1.0)
            big = 1e6 * scale
            cost = np.where(dist <= max_jump, cost, big)
            rows, cols = linear_sum_assignment(cost)
            matched = set()
            for r, c in zip(rows, cols):
                if cost[r, c] >= big:
                    continue
                t = open_tracks[r]
                t.cols.append(i)
                t.b.append(b)
                t.f.append(float(freqs[c]))
                t.h.append(float(heights[c]))
                t.missed = 0
                used[c] = True
                matched.add(r)
            for r, t in enumerate(open_tracks):
                if r not in matched:
                    t.missed += 1
        else:
            for t in open_tracks:
                t.missed += 1
        still = []
        for t in open_tracks:
            (closed if t.missed > max_gap else still).append(t)
        open_tracks = still
        for c in np.nonzero(~used)[0]:
            open_tracks.append(_Track(i, b, float(freqs[c]), float(heights[c])))
    closed.extend(open_tracks)
    ridges = [Ridge(np.array(t.b), np.array(t.f), np.array(t.h)) for t in closed if len(t.b) >= min_points]
    ridges.sort(key=lambda r: (r.b[0], r.f[0]))
    return ridges
