"""Zeros of analytic functions in rectangles: argument-principle counts + Newton."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class MissedRootWarning(UserWarning):
    """A scan cell's winding number disagrees with the roots polished inside it."""


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.x0 - pad <= z.real <= self.x1 + pad) and (self.y0 - pad <= z.imag <= self.y1 + pad)

    def corners(self):
        return (complex(self.x0, self.y0), complex(self.x1, self.y0),
                complex(self.x1, self.y1), complex(self.x0, self.y1))

    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def split(self):
        xm, ym = 0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)
        if (self.x1 - self.x0) >= (self.y1 - self.y0):
            return Rect(self.x0, xm, self.y0, self.y1), Rect(xm, self.x1, self.y0, self.y1)
        return Rect(self.x0, self.x1, self.y0, ym), Rect(self.x0, self.x1, ym, self.y1)

    @property
    def size(self) -> float:
        return max(self.x1 - self.x0, self.y1 - self.y0)


def _edge_phase(func, a: complex, b: complex, n: int, max_depth: int) -> float:
    t = np.linspace(0.0, 1.0, n + 1)
    z = a + (b - a) * t
    v = func(z)
    total = 0.0
    for k in range(n):
        total += _segment_phase(func, z[k], z[k + 1], v[k], v[k + 1], max_depth)
    return total


def _segment_phase(func, za, zb, va, vb, depth) -> float:
    if va == 0 or vb == 0:
        raise ZeroDivisionError("function vanishes on the contour")
    d = np.angle(vb / va)
    if abs(d) < np.pi / 4 or depth == 0:
        return d
    zm = 0.5 * (za + zb)
    vm = func(np.array([zm]))[0]
    return (_segment_phase(func, za, zm, va, vm, depth - 1)
            + _segment_phase(func, zm, zb, vm, vb, depth - 1))


def winding_number(func: Callable, rect: Rect, n_edge: int = 32, max_depth: int = 12) -> float:
    """Net phase change of ``func`` around ``rect`` divided by ``2 pi`` (zeros minus poles)."""
    c = rect.corners()
    total = 0.0
    for a, b in zip(c, c[1:] + c[:1]):
        total += _edge_phase(func, a, b, n_edge, max_depth)
    return total / (2 * np.pi)


def newton(func, dfunc, z0: complex, tol: float = 1e-14, maxiter: int = 60) -> tuple[complex, bool]:
    z = complex(z0)
    for _ in range(maxiter):
        f = func(np.array([z]))[0]
        df = dfunc(np.array([z]))[0]
        if df == 0 or not np.isfinite(df):
            return z, False
        step = f / df
        z -= step
        if not np.isfinite(z):
            return z, False
        if abs(step) <= tol * max(abs(z), 1.0):
            return z, True
    return z, False


def roots_in_rect(
    func: Callable,
    dfunc: Callable,
    rect: Rect,
    min_size: float = 1e-6,
    depth: int = 0,
) -> tuple[list[complex], list[Rect]]:
    """Polished zeros inside ``rect`` plus any sub-rectangles that could not be resolved.

    ``func`` must be analytic (no poles) in ``rect``.
    """
    count = int(round(winding_number(func, rect)))
    if count <= 0:
        return [], []
    if count == 1:
        z, ok = newton(func, dfunc, rect.center())
        if ok and rect.contains(z, pad=1e-12 * max(1.0, abs(z))):
            return [z], []
    if rect.size < min_size or depth > 60:
        return [], [rect]
    found, bad = [], []
    for sub in rect.split():
        r, b = roots_in_rect(func, dfunc, sub, min_size, depth + 1)
        found += r
        bad += b
    return found, bad
