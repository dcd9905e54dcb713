"""Small dense Levenberg-Marquardt least squares."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class FitError(RuntimeError):
    """Fit failed; ``result`` holds the last iterate when one exists."""

    def __init__(self, message: str, result: "LMResult | None" = None):
        super().__init__(message)
        self.result = result


@dataclass
class LMResult:
    params: np.ndarray
    cov: np.ndarray
    stderr: np.ndarray
    residuals: np.ndarray
    cost: float
    iterations: int
    converged: bool
    message: str


def _numeric_jacobian(fun, p, r0):
    jac = np.empty((r0.size, p.size))
    for k in range(p.size):
        h = 1e-7 * max(abs(p[k]), 1e-3)
        dp = p.copy()
        dp[k] += h
        jac[:, k] = (fun(dp) - r0) / h
    return jac


def levenberg_marquardt(
    fun: Callable[[np.ndarray], np.ndarray],
    p0,
    jac: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    lam0: float = 1e-3,
    xtol: float = 1e-10,
    ftol: float = 1e-15,
    max_iter: int = 200,
    x_scale=None,
) -> LMResult:
    """Minimise ``sum(fun(p)**2)``.

    The damping ``lam`` multiplies the diagonal of ``J^T J``; it is divided by
    10 after an accepted step and multiplied by 10 after a rejected one.
    Converges when the parameter step, measured in units of ``x_scale``
    (default ``|p0|``), drops below ``xtol`` relative to the parameters.
    Non-convergence and a singular normal matrix raise :class:`FitError`
    carrying the last iterate.
    """
    p = np.array(p0, dtype=float)
    if x_scale is None:
        x_scale = np.where(np.abs(p) > 0, np.abs(p), 1.0)
    x_scale = np.asarray(x_scale, dtype=float)
    r = np.asarray(fun(p), dtype=float)
    if r.size < p.size:
        raise FitError(f"under-determined: {r.size} residuals for {p.size} parameters")
    cost = float(r @ r)
    lam = lam0
    converged = False
    message = "maximum iterations reached"
    it = 0
    for it in range(1, max_iter + 1):
        J = jac(p) if jac is not None else _numeric_jacobian(fun, p, r)
        A = J.T @ J
        grad = J.T @ r
        diag = np.diag(A).copy()
        diag[diag == 0] = 1.0
        accepted = False
        while lam < 1e16:
            try:
                step = -np.linalg.solve(A + lam * np.diag(diag), grad)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            p_new = p + step
            r_new = np.asarray(fun(p_new), dtype=float)
            cost_new = float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new <= cost:
                accepted = True
                break
            lam *= 10
        if not accepted:
            converged = True
            message = "no further decrease possible"
            break
        rel_step = np.linalg.norm(step / x_scale)
        small_step = rel_step <= xtol * (np.linalg.norm(p / x_scale) + xtol)
        small_drop = cost - cost_new <= ftol * max(cost, 1e-300)
        p, r, cost = p_new, r_new, cost_new
        lam = max(lam / 10, 1e-12)
        if small_step or cost == 0.0:
            converged = True
            message = "relative step below tolerance"
            break
        if small_drop and rel_step <= 1e-6 * (np.linalg.norm(p / x_scale) + 1e-6):
            converged = True
            message = "cost stalled"
            break

    J = jac(p) if jac is not None else _numeric_jacobian(fun, p, r)
    dof = max(r.size - p.size, 1)
    s2 = cost / dof
    A = J.T @ J
    # conditioning judged on the column-scaled matrix
    d = np.sqrt(np.diag(A))
    d[d == 0] = 1.0
    if np.linalg.cond(A / np.outer(d, d)) > 1e14 or np.any(np.diag(A) == 0):
        result = LMResult(p, np.full((p.size, p.size), np.nan), np.full(p.size, np.nan),
                          r, cost, it, converged, "singular Jacobian")
        raise FitError("singular Jacobian at the solution", result)
    cov = np.linalg.inv(A) * s2
    result = LMResult(p, cov, np.sqrt(np.abs(np.diag(cov))), r, cost, it, converged, message)
    if not converged:
        raise FitError(message, result)
    return result
