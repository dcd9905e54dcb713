"""Map-level crossing analysis: find photon-like ridges, fit each crossing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .crossing import NOMINAL_SLOPE, CrossingFit, fit_avoided_crossing
from .lm import FitError
from .ridges import Ridge, column_peaks, extract_ridges, noise_floor


@dataclass
class MapFitResult:
    fits: list = field(default_factory=list)          # CrossingFit, sorted by omega_c
    labels: list = field(default_factory=list)        # label per fit (None when unmatched)
    failures: list = field(default_factory=list)      # {"omega_c_seed", "error"}
    rejected: list = field(default_factory=list)      # candidates showing no crossing
    n_ridges: int = 0


def _end_slope(r: Ridge, at_end: bool, n: int = 10) -> float:
    sl = slice(-n, None) if at_end else slice(0, n)
    return float(np.polyfit(r.b[sl], r.f[sl], 1)[0])


def photon_candidates(ridges: Sequence[Ridge], b_axis, side: str, slope_seed: float,
                      min_points: int = 20) -> list[Ridge]:
    """Ridges that reach the detuned end of the sweep and are flat there."""
    db = float(np.median(np.diff(b_axis))) if len(b_axis) > 1 else 0.0
    right = side != "left"
    edge = b_axis[-1] if right else b_axis[0]
    out = []
    for r in ridges:
        if len(r) < min_points:
            continue
        end = r.b[-1] if right else r.b[0]
        if abs(end - edge) > 3 * db + 1e-15:
            continue
        if abs(_end_slope(r, right)) < 0.5 * abs(slope_seed):
            out.append(r)
    return out


def _nearest_per_column(cols, target, tol):
    """For each column pick the peak nearest ``target[col]`` if within ``tol``."""
    bs, fs = [], []
    for k, (b, freqs) in enumerate(cols):
        if freqs.size == 0 or not np.isfinite(target[k]):
            continue
        j = int(np.argmin(np.abs(freqs - target[k])))
        if abs(freqs[j] - target[k]) <= tol:
            bs.append(b)
            fs.append(freqs[j])
    return np.array(bs), np.array(fs)


def fit_ridge_crossing(
    ridge: Ridge,
    cols,
    f_step: float,
    side: str = "right",
    slope_seed: float = NOMINAL_SLOPE,
    offset_seed: float = 0.0,
    fixed: Optional[dict] = None,
    tolerances: Sequence[float] = (16, 8, 4),
    hold_line: bool = False,
    clip: float = 4.0,
) -> tuple[CrossingFit, int]:
    """Fit one crossing starting from a photon-like ridge.

    The ridge alone (one branch, both sides of the crossing) gives the seed.
    Then, for each tolerance in ``tolerances`` (in frequency steps), the
    nearest peak in every column is taken for each model branch on the
    requested side and all four parameters are refitted; points further than
    ``clip`` robust standard deviations from the fit are dropped before a
    last refit. ``hold_line`` keeps the magnon line at its seed during the
    ridge-only stage. Returns the fit and the number of points on the
    opposite (magnon-like) branch.
    """
    right = side != "left"
    sign = -1.0 if right else 1.0
    fixed = dict(fixed or {})
    init = {"slope": slope_seed, "offset": offset_seed, "omega_c": float(ridge.f[-1] if right else ridge.f[0])}
    seed_fixed = dict(fixed)
    if hold_line:
        seed_fixed.setdefault("slope", slope_seed)
        seed_fixed.setdefault("offset", offset_seed)
    fit = fit_avoided_crossing(ridge.b, ridge.f, side="both", fixed=seed_fixed, init=init,
                               branch=np.full(len(ridge), sign))
    n_other = 0
    col_b = np.array([b for b, _ in cols])
    for tol_steps in tolerances:
        tol = max(tol_steps * f_step, 3 * fit.residual_rms)
        up, lo = fit.branches(col_b)
        bx = fit.crossing_field
        if side == "right":
            keep = col_b > bx
        elif side == "left":
            keep = col_b < bx
        else:
            keep = np.ones(col_b.size, dtype=bool)
        up = np.where(keep, up, np.nan)
        lo = np.where(keep, lo, np.nan)
        bu, fu = _nearest_per_column(cols, up, tol)
        bl, fl = _nearest_per_column(cols, lo, tol)
        n_other = bu.size if right else bl.size
        b_all = np.concatenate([bu, bl])
        f_all = np.concatenate([fu, fl])
        br = np.concatenate([np.ones(bu.size), -np.ones(bl.size)])
        init = {"omega_c": fit.omega_c, "g": fit.g, "slope": fit.slope, "offset": fit.offset}
        fit = fit_avoided_crossing(b_all, f_all, side="both", fixed=fixed, init=init, branch=br)
    if tolerances and clip:
        up, lo = fit.branches(b_all)
        resid = f_all - np.where(br > 0, up, lo)
        sigma = 1.4826 * np.median(np.abs(resid - np.median(resid)))
        keep = np.abs(resid) <= clip * max(sigma, 0.5 * f_step)
        if not keep.all():
            init = {"omega_c": fit.omega_c, "g": fit.g, "slope": fit.slope, "offset": fit.offset}
            fit = fit_avoided_crossing(b_all[keep], f_all[keep], side="both", fixed=fixed,
                                       init=init, branch=br[keep])
            n_other = int(np.sum(br[keep] > 0) if right else np.sum(br[keep] < 0))
    fit.side = side
    return fit, n_other


def match_labels(fits: Sequence[CrossingFit], labels: Sequence[str], freqs: Sequence[float],
                 max_distance: float) -> list:
    """Label each fit with the nearest expected photon frequency (one-to-one)."""
    out: list = [None] * len(fits)
    if not fits or not labels:
        return out
    cost = np.abs(np.array([f.omega_c for f in fits])[:, None] - np.asarray(freqs, dtype=float)[None, :])
    rows, cols = linear_sum_assignment(cost)
    for r, c in zip(rows, cols):
        if cost[r, c] <= max_distance:
            out[r] = labels[c]
    return out


def fit_map_crossings(
    tmap,
    min_prominence: float = 10.0,
    side: str = "right",
    slope_seed: float = NOMINAL_SLOPE,
    offset_seed: float = 0.0,
    fixed: Optional[dict] = None,
    refine: bool = False,
    min_other_points: int = 3,
    expected: Optional[Sequence[tuple]] = None,
) -> MapFitResult:
    """Find and fit every avoided crossing in a transmission map.

    Photon-like ridges are those reaching the detuned edge of the sweep with
    a slope below half the magnon seed slope; a ridge that stays within three
    frequency steps over its whole length shows no crossing and is rejected
    without fitting. Each remaining one is fitted with
    :func:`fit_ridge_crossing`; candidates whose fit shows no gap (``g``
    below one frequency step), a crossing field outside the sweep, or fewer
    than ``min_other_points`` magnon-like points are listed as rejected.
    Fits that converge onto an already-found mode are dropped. ``expected``
    is an optional list of ``(label, omega_c)`` used to name the fits.
    """
    if side not in ("right", "left", "both"):
        raise ValueError("side must be 'right', 'left' or 'both'")
    f_step = float(np.median(np.diff(tmap.f_axis)))
    floor = noise_floor(tmap) + min_prominence
    ridges = extract_ridges(tmap, min_prominence, refine=refine, min_height=floor)
    peaks = column_peaks(tmap, min_prominence, refine, floor)
    cols = [(float(b), fr) for b, (fr, _) in zip(tmap.b_axis, peaks)]
    result = MapFitResult(n_ridges=len(ridges))
    b_lo, b_hi = float(tmap.b_axis[0]), float(tmap.b_axis[-1])
    candidates = photon_candidates(ridges, tmap.b_axis, side, slope_seed)
    # a shared magnon-line seed: median over the ridge-only fits
    lines = []
    flat = [r for r in candidates if np.ptp(r.f) <= 3 * f_step]
    for r in flat:
        result.rejected.append({"omega_c_seed": float(r.f[-1] if side != "left" else r.f[0]),
                                "reason": "flat ridge: no crossing in the sweep"})
    candidates = [r for r in candidates if np.ptp(r.f) > 3 * f_step]
    for r in candidates:
        try:
            pre, _ = fit_ridge_crossing(r, cols, f_step, side, slope_seed, offset_seed, fixed, tolerances=())
            lines.append((pre.slope, pre.offset))
        except (FitError, ValueError):
            pass
    if lines:
        slope_seed, offset_seed = (float(v) for v in np.median(np.array(lines), axis=0))
    for r in candidates:
        seed = float(r.f[-1] if side != "left" else r.f[0])
        try:
            fit, n_other = fit_ridge_crossing(r, cols, f_step, side, slope_seed, offset_seed, fixed,
                                              hold_line=bool(lines))
        except (FitError, ValueError) as exc:
            result.failures.append({"omega_c_seed": seed, "error": str(exc)})
            continue
        reason = None
        if fit.g < f_step:
            reason = "no resolvable gap"
        elif not b_lo < fit.crossing_field < b_hi:
            reason = "crossing field outside the sweep"
        elif n_other < min_other_points:
            reason = f"only {n_other} points on the magnon-like branch"
        if reason:
            result.rejected.append({"omega_c_seed": seed, "reason": reason})
            continue
        dup = next((k for k, f in enumerate(result.fits) if abs(f.omega_c - fit.omega_c) < 3 * f_step), None)
        if dup is not None:
            if fit.n_upper + fit.n_lower > result.fits[dup].n_upper + result.fits[dup].n_lower:
                result.fits[dup] = fit
            continue
        result.fits.append(fit)
    result.fits.sort(key=lambda f: f.omega_c)
    if expected:
        labels, freqs = zip(*expected)
        result.labels = match_labels(result.fits, labels, freqs, max_distance=np.inf)
    else:
        result.labels = [None] * len(result.fits)
    return result
