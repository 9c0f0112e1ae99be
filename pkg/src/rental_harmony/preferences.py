"""
Demand oracles for the supported tenant classes, and sampling validators for
the miserly, weak-miserly, Archimedean and compensable assumptions.

A price vector is a sequence of exact rationals, possibly containing
``math.inf`` for rooms priced out of reach. A room with infinite price has
utility ``-inf`` and is never a best room while some finite price exists.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Mapping, Sequence

TIE_TOLERANCE = 1e-9

ASSUMPTIONS = ("miserly", "weak-miserly", "archimedean", "compensable")


class InadmissiblePrices(ValueError):
    """Every price in the vector is infinite."""


class CapabilityError(TypeError):
    """A cardinal quantity was requested from an ordinal oracle."""


def _frac(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def _check_prices(prices: Sequence, m: int | None) -> None:
    if m is not None and len(prices) != m:
        raise ValueError(f"price vector has length {len(prices)}, expected {m}")
    if all(p == math.inf for p in prices):
        raise InadmissiblePrices("all prices are infinite")


def argmax_set(utilities: Sequence) -> frozenset[int]:
    """Indices attaining the maximum; exact for rationals, 1e-9 slack otherwise."""
    best = max(utilities)
    exact = all(isinstance(u, Rational) or u == -math.inf for u in utilities)
    if exact:
        return frozenset(j for j, u in enumerate(utilities) if u == best)
    return frozenset(j for j, u in enumerate(utilities) if u >= best - TIE_TOLERANCE)


class DemandOracle:
    """Base class. Subclasses are immutable and free of side effects."""

    kind = "custom"
    cardinal = True
    n_rooms: int | None = None

    def utilities(self, prices: Sequence) -> list:
        raise CapabilityError(f"{self.kind} oracle has no cardinal utilities")

    def utility(self, room: int, prices: Sequence):
        return self.utilities(prices)[room]

    def best_rooms(self, prices: Sequence) -> frozenset[int]:
        _check_prices(prices, self.n_rooms)
        return argmax_set(self.utilities(prices))

    def to_dict(self) -> dict[str, Any]:
        raise TypeError(f"{self.kind} oracles cannot be serialized")


@dataclass(frozen=True)
class QuasilinearOracle(DemandOracle):
    """Best rooms maximize value minus price.

    >>> sorted(QuasilinearOracle.of([800, 100, 100]).best_rooms([600, 400, 0]))
    [0]
    """

    values: tuple[Fraction, ...]
    kind = "quasilinear"

    @classmethod
    def of(cls, values: Sequence) -> "QuasilinearOracle":
        return cls(tuple(_frac(v) for v in values))

    @property
    def n_rooms(self) -> int:
        return len(self.values)

    @property
    def spread(self) -> Fraction:
        return max(self.values) - min(self.values)

    def utilities(self, prices: Sequence) -> list:
        return [-math.inf if p == math.inf else v - p for v, p in zip(self.values, prices)]

    def to_dict(self) -> dict[str, Any]:
        return {"type": self.kind, "values": [str(v) for v in self.values]}


@dataclass(frozen=True)
class UtilityCurve:
    """Continuous nonincreasing piecewise-linear function of a room's own price.

    Beyond the first and last breakpoints the end segments are extended
    linearly.
    """

    prices: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.prices) < 2 or len(self.prices) != len(self.values):
            raise ValueError("a utility curve needs at least two (price, utility) breakpoints")
        if any(a >= b for a, b in zip(self.prices, self.prices[1:])):
            raise ValueError("curve breakpoints must be strictly increasing in price")
        if any(a < b for a, b in zip(self.values, self.values[1:])):
            raise ValueError("curve utilities must be nonincreasing in price")

    @classmethod
    def of(cls, points: Sequence[Sequence]) -> "UtilityCurve":
        return cls(tuple(_frac(p) for p, _ in points), tuple(_frac(u) for _, u in points))

    def __call__(self, price):
        if price == math.inf:
            return -math.inf
        xs, ys = self.prices, self.values
        if price <= xs[0]:
            seg = 0
        elif price >= xs[-1]:
            seg = len(xs) - 2
        else:
            seg = next(s for s in range(len(xs) - 1) if xs[s] <= price <= xs[s + 1])
        x0, x1, y0, y1 = xs[seg], xs[seg + 1], ys[seg], ys[seg + 1]
        return y0 + (y1 - y0) * (price - x0) / (x1 - x0)


@dataclass(frozen=True)
class ArchimedeanCurveOracle(DemandOracle):
    """Each room has its own utility curve in its own price (no externalities)."""

    curves: tuple[UtilityCurve, ...]
    kind = "archimedean-curve"

    @classmethod
    def of(cls, curves: Sequence[Sequence[Sequence]]) -> "ArchimedeanCurveOracle":
        return cls(tuple(UtilityCurve.of(c) for c in curves))

    @property
    def n_rooms(self) -> int:
        return len(self.curves)

    def utilities(self, prices: Sequence) -> list:
        return [curve(p) for curve, p in zip(self.curves, prices)]

    def satisfies_bound(self, bound) -> bool:
        """True if every free room beats every room priced at `bound`."""
        return min(c(0) for c in self.curves) >= max(c(bound) for c in self.curves)

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": self.kind,
            "curves": [[[str(p), str(u)] for p, u in zip(c.prices, c.values)] for c in self.curves],
        }


@dataclass(frozen=True)
class AffineExternalityOracle(DemandOracle):
    """Utility of room j is v_j - p_j + beta_j * (highest finite price).

    The externality term lets a room look better or worse depending on what
    the most expensive room costs.
    """

    values: tuple[Fraction, ...]
    weights: tuple[Fraction, ...]
    kind = "affine-externality"

    def __post_init__(self):
        if len(self.values) != len(self.weights):
            raise ValueError("values and weights must have the same length")

    @classmethod
    def of(cls, values: Sequence, weights: Sequence) -> "AffineExternalityOracle":
        return cls(tuple(_frac(v) for v in values), tuple(_frac(b) for b in weights))

    @property
    def n_rooms(self) -> int:
        return len(self.values)

    def utilities(self, prices: Sequence) -> list:
        top = max(p for p in prices if p != math.inf)
        return [
            -math.inf if p == math.inf else v - p + b * top
            for v, b, p in zip(self.values, self.weights, prices)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": self.kind,
            "values": [str(v) for v in self.values],
            "weights": [str(b) for b in self.weights],
        }


class CustomOracle(DemandOracle):
    """Wraps a user callable.

    Pass ``demand`` (prices -> iterable of best rooms) for an ordinal oracle,
    or ``utilities`` (prices -> list of utilities) for a cardinal one.
    Continuity is assumed and never checked.
    """

    kind = "custom"

    def __init__(self, n_rooms: int, demand: Callable | None = None, utilities: Callable | None = None):
        if (demand is None) == (utilities is None):
            raise ValueError("give exactly one of demand= or utilities=")
        self.n_rooms = n_rooms
        self._demand = demand
        self._utilities = utilities
        self.cardinal = utilities is not None

    def utilities(self, prices: Sequence) -> list:
        if self._utilities is None:
            raise CapabilityError("custom ordinal oracle has no cardinal utilities")
        return list(self._utilities(prices))

    def best_rooms(self, prices: Sequence) -> frozenset[int]:
        _check_prices(prices, self.n_rooms)
        if self._utilities is not None:
            return argmax_set(self.utilities(prices))
        rooms = frozenset(self._demand(prices))
        if not rooms:
            raise ValueError("custom demand function returned no best room")
        return rooms


def oracle_from_dict(raw: Mapping[str, Any]) -> DemandOracle:
    if not isinstance(raw, Mapping):
        raise TypeError("oracle must be a JSON object")
    kind = raw.get("type")
    if kind == "quasilinear":
        return QuasilinearOracle.of(raw["values"])
    if kind == "archimedean-curve":
        return ArchimedeanCurveOracle.of(raw["curves"])
    if kind == "affine-externality":
        return AffineExternalityOracle.of(raw["values"], raw["weights"])
    raise ValueError(f"unknown oracle type {kind!r}")


def best_rooms(oracle: DemandOracle, prices: Sequence) -> frozenset[int]:
    return oracle.best_rooms(prices)


def utility(oracle: DemandOracle, room: int, prices: Sequence):
    if not oracle.cardinal:
        raise CapabilityError(f"{oracle.kind} oracle is ordinal")
    _check_prices(prices, oracle.n_rooms)
    return oracle.utility(room, prices)


# ---------------------------------------------------------------------------
# assumption checks


def holds_at(oracle: DemandOracle, kind: str, prices: Sequence, bound=None) -> bool:
    """Check one assumption at a single price vector.

    Vectors outside the assumption's trigger region pass vacuously. For
    ``archimedean`` the vector must have exactly one zero price and one price
    equal to `bound`, all others infinite; the zero-priced room must be best.
    """
    finite = [p for p in prices if p != math.inf]
    if kind == "archimedean":
        free = [j for j, p in enumerate(prices) if p == 0]
        return bool(free) and free[0] in oracle.best_rooms(prices)
    if not finite or min(finite) > 0:
        return True
    best = oracle.best_rooms(prices)
    if kind == "miserly":
        return any(prices[j] <= 0 for j in best)
    if kind == "weak-miserly":
        top = max(finite)
        return any(prices[j] < top for j in best)
    if kind == "compensable":
        if max(finite) != bound:
            return True
        return any(prices[j] < bound for j in best)
    raise ValueError(f"unknown assumption {kind!r}; expected one of {', '.join(ASSUMPTIONS)}")


@dataclass(frozen=True)
class ValidationReport:
    kind: str
    passed: bool
    samples: int
    counterexample: tuple | None = None
    best_at_counterexample: frozenset[int] | None = None
    note: str = "sampling gives evidence, not proof; continuity is assumed, not checked"


def _sample(rng: random.Random, kind: str, m: int, bound: Fraction) -> tuple:
    def coord() -> Fraction:
        return Fraction(rng.randint(-10**6, 10**6), 10**6) * bound

    if kind == "archimedean":
        j, j2 = rng.sample(range(m), 2)
        p: list = [math.inf] * m
        p[j], p[j2] = Fraction(0), bound
        return tuple(p)
    p = [coord() for _ in range(m)]
    top = rng.randrange(m)
    if kind == "compensable":
        p[top] = bound
    if min(p) > 0:
        # reflect one coordinate (not the pinned maximum) into the nonpositive half
        low = rng.choice([j for j in range(m) if j != top]) if kind == "compensable" else rng.randrange(m)
        p[low] = -p[low]
    return tuple(p)


def validate_assumption(
    oracle: DemandOracle,
    kind: str,
    m: int,
    bound,
    sample_count: int = 1000,
    seed: int = 0,
    probes: Sequence[Sequence] = (),
) -> ValidationReport:
    """Sample the trigger region of an assumption and look for a counterexample.

    `probes` are checked before the random samples, which makes known
    counterexamples show up first in the report.
    """
    if kind not in ASSUMPTIONS:
        raise ValueError(f"unknown assumption {kind!r}; expected one of {', '.join(ASSUMPTIONS)}")
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    if kind == "archimedean" and m < 2:
        raise ValueError("the archimedean check needs at least two rooms")
    bound = _frac(bound)
    rng = random.Random(seed)
    candidates = [tuple(_frac(x) if x != math.inf else math.inf for x in p) for p in probes]
    checked = 0
    for p in candidates + [None] * sample_count:
        if p is None:
            p = _sample(rng, kind, m, bound)
        checked += 1
        if not holds_at(oracle, kind, p, bound):
            return ValidationReport(kind, False, checked, p, oracle.best_rooms(p))
    return ValidationReport(kind, True, checked)
