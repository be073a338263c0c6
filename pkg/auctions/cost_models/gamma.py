"""Regularity quantities bounding how fast f'' grows under argument shifts."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from auctions.cost_models.models import CostModel
from auctions.errors import DomainError
from auctions.settings import GRID_POINTS, Y_MIN

logger = logging.getLogger(__name__)

DEFAULT_Y_MAX = 1e4


@dataclass(frozen=True)
class GammaReport:
    gamma_times: float
    gamma_plus: float
    lam: float
    tau: float
    y_max: float
    argmax_times: float
    argmax_plus: float


def _grid_sup(ratio: Callable[[np.ndarray], np.ndarray], grid: np.ndarray) -> Tuple[float, float]:
    """Sup of ``ratio`` over ``grid`` plus a bounded refinement around the grid argmax."""
    if grid.size == 0:
        return 1.0, float("nan")
    with np.errstate(divide="ignore", invalid="ignore"):
        values = ratio(grid)
    values = np.where(np.isfinite(values), values, -np.inf)
    i = int(np.argmax(values))
    best, where = float(values[i]), float(grid[i])
    if not np.isfinite(best):
        return 1.0, float("nan")

    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if hi > lo:

        def negated(y: float) -> float:
            with np.errstate(divide="ignore", invalid="ignore"):
                v = float(ratio(np.asarray([y]))[0])
            return -v if np.isfinite(v) else np.inf

        res = minimize_scalar(negated, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * hi})
        if res.success and -res.fun > best:
            best, where = float(-res.fun), float(res.x)
    return best, where


def gamma_quantities(
    model: CostModel,
    lam: float,
    tau: float,
    y_max: float = DEFAULT_Y_MAX,
    points: int = GRID_POINTS,
) -> GammaReport:
    """Gamma-times and Gamma-plus of ``model`` on (0, y_max].

    gamma_times = max{1, sup_y (lam-1)*y*f''(lam*y) / (f'(lam*y) - f'(y))}
    gamma_plus  = max{1, sup_{tau <= y} f''(y+lam) / f''(y)}
    For models that are convex only above ``convex_from`` the grids start there.
    """
    if not lam > 1:
        raise DomainError(f"lambda must exceed 1, got {lam}")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if not y_max > 0:
        raise DomainError(f"y_max must be positive, got {y_max}")
    model.f_second(1.0)

    start = max(Y_MIN, model.convex_from * (1 + 1e-9))
    grid = np.geomspace(start, max(y_max, start), points)

    def times_ratio(y: np.ndarray) -> np.ndarray:
        num = (lam - 1.0) * y * model.f_second(lam * y)
        den = model.f_prime(lam * y) - model.f_prime(y)
        return np.where(den > 0, num / den, -np.inf)

    plus_start = max(tau, start)
    plus_grid = np.geomspace(plus_start, max(y_max, plus_start), points)

    def plus_ratio(y: np.ndarray) -> np.ndarray:
        base = model.f_second(y)
        return np.where(base > 0, model.f_second(y + lam) / base, -np.inf)

    gamma_times, at_times = _grid_sup(times_ratio, grid)
    gamma_plus, at_plus = _grid_sup(plus_ratio, plus_grid)
    logger.debug("gamma_times=%.6g at y=%.4g, gamma_plus=%.6g at y=%.4g", gamma_times, at_times, gamma_plus, at_plus)

    return GammaReport(
        gamma_times=max(1.0, gamma_times),
        gamma_plus=max(1.0, gamma_plus),
        lam=float(lam),
        tau=float(tau),
        y_max=float(y_max),
        argmax_times=at_times,
        argmax_plus=at_plus,
    )
