"""Tikhonov (damped least-squares) solves and L-curve calibration.

The regularization weight trades noise amplification against bias. It is
chosen offline: a recorded calibration window is swept over a grid of
weights, each producing one (residual norm, solution norm) point, and the
corner of the resulting curve in log-log space is selected.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SingularNormalMatrix
from .signals import SignalSeries


def tikhonov_gain(h, alpha: float) -> np.ndarray:
    """Precomputed damped least-squares gain ``(H^T H + alpha I)^-1 H^T``."""
    h = np.asarray(h, dtype=float)
    hth = h.T @ h + alpha * np.eye(h.shape[1])
    try:
        return np.linalg.solve(hth, h.T)
    except np.linalg.LinAlgError as exc:
        raise SingularNormalMatrix(
            "normal equations are singular; H is rank deficient and alpha = 0"
        ) from exc


def tikhonov_solve(h, rhs, alpha: float) -> np.ndarray:
    """Minimize ``|rhs - H f|^2 + alpha |f|^2``.

    With ``alpha = 0`` and invertible H this is the plain solve; for any
    ``alpha >= 0`` the returned vector zeroes the objective gradient.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    return tikhonov_gain(h, alpha) @ np.asarray(rhs, dtype=float)


def default_alpha_grid(h, count: int = 50) -> np.ndarray:
    """Log-spaced grid spanning ``[1e-12, 1e2] * |H|^2``.

    Scale-aware: anchoring at the squared spectral norm of H covers the
    under- and over-smoothing regimes regardless of problem units.
    """
    scale = np.linalg.norm(np.asarray(h, dtype=float), 2) ** 2
    return scale * np.logspace(-12, 2, count)


@dataclass(frozen=True)
class LCurvePoint:
    """One calibration sweep point (norms aggregated over the window)."""

    alpha: float
    residual_norm: float
    solution_norm: float


@dataclass(frozen=True)
class LCurveResult:
    alpha: float
    index: int
    points: tuple
    degenerate: bool


def lcurve_corner(residual_norms, solution_norms):
    """Index of the maximum-curvature corner of the L-curve.

    Works on (log residual, log solution) with three-point signed
    curvature; only corners turning the expected way (steep descent of
    the solution norm giving way to residual growth) count. Returns
    ``(index, degenerate)``; a curve with no such corner is degenerate
    and maps to index 0 (the smallest regularization weight).
    """
    rho = np.asarray(residual_norms, dtype=float)
    eta = np.asarray(solution_norms, dtype=float)
    if rho.shape != eta.shape or rho.ndim != 1:
        raise ValueError("residual and solution norms must be equal-length 1-D")
    n = rho.size
    if n < 3:
        return 0, True
    floor = 1e-300
    x = np.log(np.maximum(rho, floor))
    y = np.log(np.maximum(eta, floor))
    best_idx, best_curv = 0, 0.0
    for i in range(1, n - 1):
        v1 = np.array([x[i] - x[i - 1], y[i] - y[i - 1]])
        v2 = np.array([x[i + 1] - x[i], y[i + 1] - y[i]])
        cross = v1[0] * v2[1] - v1[1] * v2[0]
        d1 = np.hypot(*v1)
        d2 = np.hypot(*v2)
        d3 = np.hypot(x[i + 1] - x[i - 1], y[i + 1] - y[i - 1])
        if d1 == 0 or d2 == 0 or d3 == 0:
            continue
        curv = 2.0 * cross / (d1 * d2 * d3)
        if curv > best_curv:
            best_idx, best_curv = i, curv
    if best_curv <= 1e-12:
        return 0, True
    return best_idx, False


def lcurve_select(session, calibration: SignalSeries, alpha_grid=None) -> LCurveResult:
    """Pick the regularization weight from a recorded calibration window.

    The session's unregularized pass over the window fixes a per-step
    right-hand-side sequence; every grid value is then evaluated against
    that same sequence, which makes the residual norm nondecreasing and
    the solution norm nonincreasing in alpha by construction. The corner
    of the resulting curve is returned along with all sweep points for
    diagnostics.

    A single-point grid short-circuits to that value with a warning; a
    degenerate (cornerless) curve falls back to the smallest grid value.
    """
    if calibration.n_samples < 10:
        raise ValueError(
            f"calibration window has {calibration.n_samples} samples; need >= 10"
        )
    if alpha_grid is None:
        alpha_grid = default_alpha_grid(session.h_eff)
    grid = np.asarray(alpha_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("alpha grid must be a nonempty 1-D array")
    if np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise ValueError("alpha grid must be nonnegative and sorted ascending")

    rhs = session.record_innovations(calibration)  # (n_steps, n_measured)
    h = session.h_eff
    points = []
    for alpha in grid:
        f = rhs @ tikhonov_gain(h, alpha).T
        residual = rhs - f @ h.T
        points.append(
            LCurvePoint(
                alpha=float(alpha),
                residual_norm=float(np.linalg.norm(residual)),
                solution_norm=float(np.linalg.norm(f)),
            )
        )

    rho = np.array([p.residual_norm for p in points])
    eta = np.array([p.solution_norm for p in points])
    slack = 1e-9
    if np.any(np.diff(rho) < -slack * (rho.max() + 1e-300)) or np.any(
        np.diff(eta) > slack * (eta.max() + 1e-300)
    ):
        raise RuntimeError("L-curve sweep lost monotonicity; inputs may be non-finite")

    if grid.size < 3:
        warnings.warn(
            f"alpha grid has {grid.size} point(s); corner detection is vacuous",
            stacklevel=2,
        )
        return LCurveResult(
            alpha=points[0].alpha, index=0, points=tuple(points), degenerate=True
        )
    index, degenerate = lcurve_corner(rho, eta)
    if degenerate:
        warnings.warn(
            "L-curve has no corner (degenerate curve); using the smallest alpha",
            stacklevel=2,
        )
    return LCurveResult(
        alpha=points[index].alpha, index=index, points=tuple(points), degenerate=degenerate
    )
