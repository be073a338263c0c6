"""Production cost functions f, their derivatives and Fenchel conjugates."""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq, minimize_scalar

from auctions.cost_models.power_sums import faulhaber_coefficients
from auctions.errors import DomainError, NumericalError
from auctions.settings import SEARCH_HORIZON

logger = logging.getLogger(__name__)

Quantity = float | np.ndarray


def as_quantity(y: Quantity) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"quantity must be finite and >= 0, got {y!r}")
    return arr


def shaped(values: np.ndarray, like: Quantity) -> Quantity:
    return float(values) if np.ndim(like) == 0 else values


def _check_price(p: float) -> float:
    p = float(p)
    if not np.isfinite(p) or p < 0:
        raise DomainError(f"price must be finite and >= 0, got {p!r}")
    return p


class CostModel(ABC):
    """A convex production cost f on [0, inf) shared by every item.

    Subclasses give f, f' and f''. The conjugate f*(p) = sup_y {p*y - f(y)}
    is found numerically by solving f'(y) = p unless a subclass has a
    closed form.
    """

    kind: ClassVar[str]

    @abstractmethod
    def f(self, y: Quantity) -> Quantity: ...

    @abstractmethod
    def f_prime(self, y: Quantity) -> Quantity: ...

    @abstractmethod
    def f_second(self, y: Quantity) -> Quantity: ...

    @abstractmethod
    def to_spec(self) -> Dict[str, Any]: ...

    @property
    def strictly_convex(self) -> bool:
        return True

    @property
    def convex_from(self) -> float:
        """Quantity above which f' is strictly increasing and nonnegative."""
        return 0.0

    def maximizer(self, p: float) -> float:
        """argmax_{y >= 0} {p*y - f(y)}, i.e. f*'(p)."""
        p = _check_price(p)
        lo = self.convex_from
        candidates = [0.0]

        if p >= self.f_prime(lo):
            candidates.append(self._invert_marginal(p, lo))
        if lo > 0:
            res = minimize_scalar(lambda y: self.f(y) - p * y, bounds=(0.0, lo), method="bounded")
            candidates.append(float(res.x))

        return max(candidates, key=lambda y: (p * y - self.f(y), -y))

    def _invert_marginal(self, p: float, lo: float) -> float:
        if self.f_prime(lo) == p:
            return lo
        hi = max(1.0, 2.0 * lo)
        while self.f_prime(hi) < p:
            hi *= 2.0
            if hi > SEARCH_HORIZON:
                raise NumericalError(f"could not bracket f'(y) = {p} below y = {SEARCH_HORIZON:g}")
        logger.debug("inverting f' at p=%g on [%g, %g]", p, lo, hi)
        try:
            return float(brentq(lambda y: self.f_prime(y) - p, lo, hi, xtol=1e-15, maxiter=500))
        except (RuntimeError, ValueError) as exc:
            raise NumericalError(f"root finding for f'(y) = {p} failed: {exc}") from exc

    def conjugate(self, p: float) -> float:
        p = _check_price(p)
        y = self.maximizer(p)
        return max(0.0, p * y - float(self.f(y)))

    def conjugate_prime(self, p: float) -> float:
        return self.maximizer(p)

    def marginal(self, l: int) -> float:
        """Marginal cost c(l) = f(l) - f(l-1) of the l-th unit."""
        if l < 1:
            raise DomainError(f"unit index must be >= 1, got {l}")
        return float(self.f(float(l))) - float(self.f(float(l - 1)))


@dataclass(frozen=True)
class PowerCost(CostModel):
    """f(y) = a * y^(gamma+1)."""

    a: float
    gamma: float
    kind: ClassVar[str] = "power"

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise DomainError(f"power cost needs a > 0, got {self.a}")
        if not self.gamma >= 1:
            raise DomainError(f"power cost needs gamma >= 1, got {self.gamma}")

    def f(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self.a * arr ** (self.gamma + 1), y)

    def f_prime(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self.a * (self.gamma + 1) * arr**self.gamma, y)

    def f_second(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self.a * (self.gamma + 1) * self.gamma * arr ** (self.gamma - 1), y)

    def maximizer(self, p: float) -> float:
        p = _check_price(p)
        return (p / (self.a * (self.gamma + 1))) ** (1.0 / self.gamma)

    def conjugate(self, p: float) -> float:
        y = self.maximizer(p)
        return p * y * self.gamma / (self.gamma + 1)

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "a": self.a, "gamma": self.gamma}


@dataclass(frozen=True)
class LinearMarginalCost(CostModel):
    """Marginal cost c(l) = a*l + b, smoothed to f(y) = (a/2)y^2 + (b + a/2)y."""

    a: float
    b: float
    kind: ClassVar[str] = "linear_marginal"

    def __post_init__(self) -> None:
        if self.a < 0 or self.b < 0:
            raise DomainError(f"linear marginal cost needs a, b >= 0, got a={self.a}, b={self.b}")
        if self.a == 0 and self.b == 0:
            raise DomainError("linear marginal cost needs a > 0 or b > 0")

    @property
    def strictly_convex(self) -> bool:
        return self.a > 0

    def f(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(0.5 * self.a * arr**2 + (self.b + 0.5 * self.a) * arr, y)

    def f_prime(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self.a * arr + self.b + 0.5 * self.a, y)

    def f_second(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(np.full_like(arr, self.a), y)

    def maximizer(self, p: float) -> float:
        p = _check_price(p)
        base = self.b + 0.5 * self.a
        if p <= base:
            return 0.0
        if self.a == 0:
            raise DomainError(f"conjugate is unbounded for p={p} > b with a = 0")
        return (p - base) / self.a

    def conjugate(self, p: float) -> float:
        y = self.maximizer(p)
        return 0.5 * self.a * y * y

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class PolyMarginalCost(CostModel):
    """f(y) = a * S_d(y), the Faulhaber polynomial of sum_{l<=y} l^d.

    The polynomial is used unmodified; below ``convex_from`` it need not be
    convex or increasing, and conjugates account for that region separately.
    """

    a: float
    d: int
    kind: ClassVar[str] = "poly_marginal"
    poly: Polynomial = field(init=False, repr=False, compare=False)
    _dpoly: Polynomial = field(init=False, repr=False, compare=False)
    _ddpoly: Polynomial = field(init=False, repr=False, compare=False)
    _convex_from: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise DomainError(f"poly marginal cost needs a > 0, got {self.a}")
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 2:
            raise DomainError(f"poly marginal cost needs an integer d >= 2, got {self.d}")
        object.__setattr__(self, "d", int(self.d))

        coeffs = [self.a * float(c) for c in faulhaber_coefficients(self.d)]
        poly = Polynomial(coeffs)
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "_dpoly", poly.deriv(1))
        object.__setattr__(self, "_ddpoly", poly.deriv(2))

        threshold = 0.0
        for deriv in (self._dpoly, self._ddpoly):
            roots = deriv.roots()
            real = roots[np.abs(roots.imag) < 1e-12].real
            real = real[real >= 0]
            if real.size:
                threshold = max(threshold, float(real.max()))
        object.__setattr__(self, "_convex_from", threshold)

    @property
    def convex_from(self) -> float:
        return self._convex_from

    def f(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self.poly(arr), y)

    def f_prime(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self._dpoly(arr), y)

    def f_second(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self._ddpoly(arr), y)

    def _invert_marginal(self, p: float, lo: float) -> float:
        """Largest real root of f'(y) = p, polished with one Newton step."""
        roots = (self._dpoly - p).roots()
        real = roots[np.abs(roots.imag) <= 1e-9 * np.maximum(1.0, np.abs(roots.real))].real
        real = real[real >= lo - 1e-12]
        if real.size == 0:
            return super()._invert_marginal(p, lo)
        y = max(float(real.max()), lo)
        slope = float(self._ddpoly(y))
        if slope > 0:
            y = max(lo, y - (float(self._dpoly(y)) - p) / slope)
        return y

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "a": self.a, "d": self.d}


def _log_marginal_knots(segments: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Slopes at integer knots, half-slopes delta(i) and cumulative costs F(i).

    delta(i) = s_i + (-1)^i * delta0 with s_0 = 0 and s_{i+1} = 2g(i+1) - s_i;
    every delta(i) must lie in [g(i+1), g(i)], where g(i) = (c(i+1) - c(i))/2.
    delta0 is the midpoint of the interval those constraints leave open.
    """
    idx = np.arange(segments + 1)
    g = 0.5 * np.log1p(1.0 / (idx + 1.0))

    lo, hi = -np.inf, np.inf
    s = 0.0
    shifts = np.empty(segments)
    for i in range(segments):
        shifts[i] = s
        if i % 2 == 0:
            lo, hi = max(lo, g[i + 1] - s), min(hi, g[i] - s)
        else:
            lo, hi = max(lo, s - g[i]), min(hi, s - g[i + 1])
        s = 2.0 * g[i + 1] - s
    if lo > hi:
        raise NumericalError(f"no admissible delta(0) for {segments} log-marginal segments")

    delta0 = 0.5 * (lo + hi)
    signs = np.where(idx[:segments] % 2 == 0, 1.0, -1.0)
    deltas = shifts + signs * delta0

    c = np.log1p(np.arange(1, segments + 1, dtype=float))
    slopes = np.empty(segments + 1)
    slopes[:segments] = c - deltas
    slopes[segments] = c[-1] + deltas[-1]
    cumulative = np.concatenate(([0.0], np.cumsum(c)))
    return slopes, deltas, cumulative


@dataclass(frozen=True)
class LogMarginalCost(CostModel):
    """Marginal cost c(l) = ln(1+l) with a concave piecewise-linear f'.

    On [i, i+1] the slope of f' is 2*delta(i) and the segment integral is c(i+1).
    Past the last segment f' continues with the last slope.
    """

    segments: int = 65
    kind: ClassVar[str] = "log_marginal"
    knots: np.ndarray = field(init=False, repr=False, compare=False)
    deltas: np.ndarray = field(init=False, repr=False, compare=False)
    cumulative: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if int(self.segments) != self.segments or self.segments < 1:
            raise DomainError(f"segments must be a positive integer, got {self.segments}")
        slopes, deltas, cumulative = _log_marginal_knots(int(self.segments))
        object.__setattr__(self, "knots", slopes)
        object.__setattr__(self, "deltas", deltas)
        object.__setattr__(self, "cumulative", cumulative)

    def _locate(self, arr: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.segments
        seg = np.minimum(np.floor(arr), n).astype(int)
        t = arr - seg
        slope2 = np.where(seg < n, 2.0 * self.deltas[np.minimum(seg, n - 1)], 2.0 * self.deltas[-1])
        return seg, t, slope2

    def f(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        seg, t, slope2 = self._locate(arr)
        return shaped(self.cumulative[seg] + self.knots[seg] * t + 0.5 * slope2 * t * t, y)

    def f_prime(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        seg, t, slope2 = self._locate(arr)
        return shaped(self.knots[seg] + slope2 * t, y)

    def f_second(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        _, _, slope2 = self._locate(arr)
        return shaped(slope2, y)

    def maximizer(self, p: float) -> float:
        """Inverse of the piecewise-linear f'; 0 at or below f'(0)."""
        p = _check_price(p)
        if p <= self.knots[0]:
            return 0.0
        n = self.segments
        seg = min(int(np.searchsorted(self.knots, p, side="right")) - 1, n)
        return seg + (p - self.knots[seg]) / (2.0 * self.deltas[min(seg, n - 1)])

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "segments": self.segments}


@dataclass(frozen=True)
class StepSupplyCost(CostModel):
    """k free copies of each item; producing more is impossible."""

    k: int
    kind: ClassVar[str] = "step_supply"

    def __post_init__(self) -> None:
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise DomainError(f"supply k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def strictly_convex(self) -> bool:
        return False

    def f(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        if np.any(arr > self.k):
            raise DomainError(f"step supply cost is unbounded above k={self.k}")
        return shaped(np.zeros_like(arr), y)

    def f_prime(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        if np.any(arr >= self.k):
            raise DomainError(f"step supply marginal cost undefined at y >= k={self.k}")
        return shaped(np.zeros_like(arr), y)

    def f_second(self, y: Quantity) -> Quantity:
        raise DomainError("step supply cost has no second derivative")

    def maximizer(self, p: float) -> float:
        _check_price(p)
        return float(self.k)

    def conjugate(self, p: float) -> float:
        return self.k * _check_price(p)

    def marginal(self, l: int) -> float:
        if l > self.k:
            raise DomainError(f"unit {l} exceeds supply k={self.k}")
        return super().marginal(l)

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "k": self.k}


def eval_f(model: CostModel, y: Quantity) -> Quantity:
    return model.f(y)


def eval_f_prime(model: CostModel, y: Quantity) -> Quantity:
    return model.f_prime(y)


def eval_f_second(model: CostModel, y: Quantity) -> Quantity:
    return model.f_second(y)


def eval_conjugate(model: CostModel, p: float) -> float:
    return model.conjugate(p)


def eval_conjugate_prime(model: CostModel, p: float) -> float:
    return model.conjugate_prime(p)


def marginal_cost(model: CostModel, l: int) -> float:
    return model.marginal(l)
