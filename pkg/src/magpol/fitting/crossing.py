"""Two-oscillator fits to avoided-crossing branches."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lm import FitError, levenberg_marquardt

NOMINAL_SLOPE = 28e9  # Hz/T, seed only
_NAMES = ("omega_c", "g2", "slope", "offset")


@dataclass
class CrossingFit:
    omega_c: float
    g: float
    slope: float
    offset: float
    residual_rms: float
    side: str
    stderr: dict = field(default_factory=dict)
    n_upper: int = 0
    n_lower: int = 0
    fixed: tuple = ()
    converged: bool = True
    message: str = ""

    @property
    def crossing_field(self) -> float:
        return (self.omega_c - self.offset) / self.slope

    def branches(self, b):
        wm = self.slope * np.asarray(b, dtype=float) + self.offset
        mean = 0.5 * (self.omega_c + wm)
        s = np.sqrt(0.25 * (self.omega_c - wm) ** 2 + self.g**2)
        return mean + s, mean - s

    def to_dict(self) -> dict:
        values = {"omega_c": self.omega_c, "g": self.g, "slope": self.slope, "offset": self.offset}
        return {
            "params": {k: {"value": v, "stderr": self.stderr.get(k)} for k, v in values.items()},
            "fixed": list(self.fixed),
            "side": self.side,
            "residual_rms": self.residual_rms,
            "n_upper": self.n_upper,
            "n_lower": self.n_lower,
            "converged": self.converged,
            "message": self.message,
        }


def _model(p, b, sign):
    wc, u, slope, offset = p
    wm = slope * b + offset
    delta = wc - wm
    s = np.sqrt(np.maximum(0.25 * delta * delta + u, 1.0))  # 1 Hz floor keeps the cusp finite
    return 0.5 * (wc + wm) + sign * s, delta, s


def _jac(p, b, sign):
    _, delta, s = _model(p, b, sign)
    t = sign * delta / (4 * s)
    j = np.empty((b.size, 4))
    j[:, 0] = 0.5 + t
    j[:, 1] = sign / (2 * s)
    j[:, 2] = b * (0.5 - t)
    j[:, 3] = 0.5 - t
    return j


def seed_crossing(b, f, side: str, slope: float, offset: float) -> tuple[float, float]:
    """``(omega_c, g)`` seeds.

    ``omega_c`` comes from the photon-like point at the far end of the fitted
    side; ``g`` is half the smallest gap between points above and below it near
    the crossing field, or the distance of the nearest point to ``omega_c``.
    """
    wm = slope * b + offset
    far = np.abs(f - wm) >= np.median(np.abs(f - wm))
    cand = np.nonzero(far)[0]
    k = cand[np.argmax(b[cand])] if side != "left" else cand[np.argmin(b[cand])]
    wc = float(f[k])
    b_star = (wc - offset) / slope
    order = np.argsort(np.abs(b - b_star))
    near = order[: max(4, b.size // 20)]
    above = f[near][f[near] > wc]
    below = f[near][f[near] < wc]
    if above.size and below.size:
        g = 0.5 * float(above.min() - below.max())
    else:
        g = float(np.min(np.abs(f[near] - wc)))
    return wc, max(g, 1e-6 * wc)


def fit_avoided_crossing(
    b,
    f,
    side: str = "right",
    fixed: Optional[dict] = None,
    init: Optional[dict] = None,
    branch=None,
    max_rounds: int = 5,
) -> CrossingFit:
    """Fit ``omega_c``, ``g``, magnon ``slope`` and ``offset`` to branch points.

    ``side`` keeps points right (``B`` above the crossing field), left, or on
    both sides. ``fixed`` holds any of ``slope``/``offset`` to freeze; ``init``
    may seed any of ``omega_c``, ``g``, ``slope``, ``offset``. Points are
    assigned to the upper or lower branch by which side of the mean frequency
    they fall on, unless ``branch`` (+1 upper, -1 lower) is given; assignment
    and side selection are repeated until they stop changing.
    """
    if side not in ("right", "left", "both"):
        raise ValueError("side must be 'right', 'left' or 'both'")
    b = np.asarray(b, dtype=float)
    f = np.asarray(f, dtype=float)
    if b.shape != f.shape or b.ndim != 1:
        raise ValueError("field and frequency arrays must be 1-D and the same length")
    fixed = dict(fixed or {})
    unknown = set(fixed) - {"slope", "offset"}
    if unknown:
        raise ValueError(f"only slope/offset can be fixed, got {sorted(unknown)}")
    init = dict(init or {})
    slope = fixed.get("slope", init.get("slope", NOMINAL_SLOPE))
    offset = fixed.get("offset", init.get("offset", 0.0))
    if "omega_c" in init and "g" in init:
        wc, g = init["omega_c"], init["g"]
    else:
        wc, g = seed_crossing(b, f, side, slope, offset)
        wc, g = init.get("omega_c", wc), init.get("g", g)
    p = np.array([wc, g * g, slope, offset], dtype=float)
    free = np.array([True, True, "slope" not in fixed, "offset" not in fixed])
    given_branch = None if branch is None else np.asarray(branch, dtype=float)

    prev_key = None
    res = None
    rounds = 0
    while rounds < max_rounds:
        wm = p[2] * b + p[3]
        b_star = (p[0] - p[3]) / p[2]
        if side == "right":
            keep = b > b_star
        elif side == "left":
            keep = b < b_star
        else:
            keep = np.ones(b.size, dtype=bool)
        if given_branch is not None:
            sign = given_branch
        else:
            sign = np.where(f >= 0.5 * (p[0] + wm), 1.0, -1.0)
        bk, fk, sk = b[keep], f[keep], sign[keep]
        if bk.size < 5:
            raise FitError(f"only {bk.size} points on the {side} side; need at least 5")
        if bk.size < int(free.sum()):
            raise FitError("under-determined parameter set")
        key = (keep.tobytes(), sign.tobytes(), free.tobytes())
        if key == prev_key:
            break
        prev_key = key
        rounds += 1

        def resid(q, bk=bk, fk=fk, sk=sk, mask=free.copy()):
            full = p.copy()
            full[mask] = q
            return _model(full, bk, sk)[0] - fk

        def jac(q, bk=bk, sk=sk, mask=free.copy()):
            full = p.copy()
            full[mask] = q
            return _jac(full, bk, sk)[:, mask]

        scale = np.array([abs(p[0]), max(p[0] ** 2 * 1e-2, p[1]), abs(p[2]), abs(p[0])])[free]
        try:
            res = levenberg_marquardt(resid, p[free], jac=jac, x_scale=scale)
        except FitError as exc:
            # g -> 0 sits on the g^2 >= 0 boundary, where the g^2 column degenerates
            if not free[1] or exc.result is None or exc.result.params[1] > 0:
                raise
            res = None
        if res is None or (free[1] and res.params[1] < 0):
            p[1] = 0.0
            free[1] = False
            res = None
            rounds -= 1
            continue
        p[free] = res.params

    if res is None:
        raise FitError("avoided-crossing fit did not settle")
    wc, u, slope, offset = p
    g = float(np.sqrt(max(u, 0.0)))
    err = np.full(4, np.nan)
    err[free] = res.stderr
    stderr = {
        "omega_c": float(err[0]),
        "g": float(err[1] / (2 * g)) if g > 0 else float(np.sqrt(abs(err[1]))),
        "slope": float(err[2]) if free[2] else 0.0,
        "offset": float(err[3]) if free[3] else 0.0,
    }
    rms = float(np.sqrt(np.mean(res.residuals**2)))
    n_up = int(np.sum(sk > 0))
    return CrossingFit(float(wc), g, float(slope), float(offset), rms, side, stderr,
                       n_up, int(sk.size - n_up), tuple(sorted(fixed)), res.converged, res.message)
