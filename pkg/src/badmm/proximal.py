"""Exact scalar/vector shrinkage operators plus a brute-force prox oracle.

The two operators deliberately use different quadratic couplings:

* ``soft_shrink_scalar(v, kappa)`` minimizes ``kappa*|t| + (t - v)^2 / 2``
* ``half_shrink_scalar(v, kappa)`` minimizes ``kappa*|t|^(1/2) + (t - v)^2``

Under these conventions the l1 update of the solver shrinks at threshold
``lambda/alpha`` while the l1/2 update shrinks at ``2*lambda/alpha``, and both
are exact minimizers of their subproblems.
"""

from __future__ import annotations

import enum
import math
from typing import Callable, Tuple

import numpy as np

from .errors import InvalidBracket, InvalidParameter
from .numerics import as_vector

# |v| <= HALF_THRESHOLD_COEFF * kappa^(2/3) is the dead zone of half shrinkage.
HALF_THRESHOLD_COEFF = 54.0 ** (1.0 / 3.0) / 4.0

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class ShrinkageKind(enum.Enum):
    SOFT = "soft"
    HALF = "half"


def half_shrink_threshold(kappa: float) -> float:
    """Boundary of the zero region of half shrinkage with weight ``kappa``."""
    return HALF_THRESHOLD_COEFF * kappa ** (2.0 / 3.0)


def _check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa < 0.0:
        raise InvalidParameter(f"shrinkage weight must be finite and >= 0, got {kappa}")
    return kappa


def _soft(values: np.ndarray, kappa: float) -> np.ndarray:
    return np.sign(values) * np.maximum(np.abs(values) - kappa, 0.0)


def _half(values: np.ndarray, kappa: float) -> np.ndarray:
    if kappa == 0.0:
        return values.copy()
    mag = np.abs(values)
    # arccos argument is <= sqrt(2)/2 wherever mag exceeds the threshold;
    # the clip only sanitizes lanes that the where() masks out anyway.
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        angle = np.arccos(np.clip((kappa / 8.0) * (mag / 3.0) ** -1.5, -1.0, 1.0))
        nonzero = (2.0 * values / 3.0) * (1.0 + np.cos(2.0 * (np.pi - angle) / 3.0))
    return np.where(mag > half_shrink_threshold(kappa), nonzero, 0.0)


def soft_shrink_scalar(v: float, kappa: float) -> float:
    """Exact minimizer of ``kappa*|t| + (t - v)^2 / 2``."""
    kappa = _check_kappa(kappa)
    if not math.isfinite(v):
        raise InvalidParameter(f"input must be finite, got {v}")
    return float(_soft(np.array([float(v)]), kappa)[0])


def half_shrink_scalar(v: float, kappa: float) -> float:
    """Global minimizer of ``kappa*|t|^(1/2) + (t - v)^2``.

    Returns 0 inside the dead zone ``|v| <= half_shrink_threshold(kappa)``
    (ties at the boundary resolve to 0) and the closed-form cosine branch
    outside it.
    """
    kappa = _check_kappa(kappa)
    if not math.isfinite(v):
        raise InvalidParameter(f"input must be finite, got {v}")
    return float(_half(np.array([float(v)]), kappa)[0])


def shrink_vector(v, kappa: float, kind: ShrinkageKind) -> np.ndarray:
    """Componentwise shrinkage of a vector; same math as the scalar ops."""
    kappa = _check_kappa(kappa)
    arr = as_vector(v, "shrinkage input")
    if kind is ShrinkageKind.SOFT:
        return _soft(arr, kappa)
    if kind is ShrinkageKind.HALF:
        return _half(arr, kappa)
    raise InvalidParameter(f"unknown shrinkage kind {kind!r}")


def _eval_on_grid(objective: Callable[[float], float], grid: np.ndarray) -> np.ndarray:
    """Evaluate objective over a grid; vectorized call when supported."""
    try:
        vals = np.asarray(objective(grid), dtype=float)
        if vals.shape == grid.shape:
            return vals
    except Exception:
        pass
    return np.array([float(objective(float(t))) for t in grid])


def prox_oracle_scalar(
    objective: Callable[[float], float],
    bracket: Tuple[float, float],
    grid_points: int = 2001,
    refine_tol: float = 1e-10,
) -> float:
    """Brute-force scalar minimizer: uniform grid + golden-section refinement.

    Scans ``grid_points`` uniform samples on ``bracket``, refines the best
    grid cell by golden-section search down to width ``refine_tol``, and
    always compares against ``t = 0`` when the bracket contains it. Used as
    the independent reference the shrinkage operators are certified against.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise InvalidBracket(f"bracket must satisfy lo < hi, got ({lo}, {hi})")
    if grid_points < 1000:
        raise InvalidParameter(f"grid_points must be >= 1000, got {grid_points}")

    grid = np.linspace(lo, hi, int(grid_points))
    vals = _eval_on_grid(objective, grid)
    if not np.all(np.isfinite(vals)):
        raise InvalidParameter("objective is not finite on the bracket")
    best = int(np.argmin(vals))

    a = float(grid[max(best - 1, 0)])
    b = float(grid[min(best + 1, len(grid) - 1)])
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = float(objective(c))
    fd = float(objective(d))
    while b - a > refine_tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = float(objective(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = float(objective(d))

    candidates = [c, d, float(grid[best])]
    if lo <= 0.0 <= hi:
        candidates.append(0.0)
    return min(candidates, key=lambda t: float(objective(t)))
