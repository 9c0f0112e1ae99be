"""
Kuhn (Freudenthal) triangulation of the standard simplex and price maps.

Grid points are integer vectors ``y`` with ``sum(y) == k``; the barycentric
point is ``y / k``. Internally a cell is described in cumulative coordinates
``U_t = y_1 + ... + y_t`` (t < m), where the simplex becomes the order region
``0 <= U_1 <= ... <= U_{m-1} <= k``. A cell is a base point ``b`` plus a
permutation: its vertices are ``b, b + e_{pi(1)}, b + e_{pi(1)} + e_{pi(2)}, ...``.
A unit step in ``U_t`` moves one unit from ``y_{t+1}`` to ``y_t``.

There are exactly ``k ** (m - 1)`` cells.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

Point = tuple[Fraction, ...]


def _check(m: int, k: int) -> None:
    if m < 2:
        raise ValueError(f"need at least 2 rooms, got m={m}")
    if k < 1:
        raise ValueError(f"resolution must be positive, got k={k}")


def grid_vertices(m: int, k: int) -> list[tuple[int, ...]]:
    """All grid points of resolution k, lexicographically descending.

    >>> grid_vertices(2, 3)
    [(3, 0), (2, 1), (1, 2), (0, 3)]
    """
    _check(m, k)

    def rec(left: int, slots: int):
        if slots == 1:
            yield (left,)
            return
        for first in range(left, -1, -1):
            for rest in rec(left - first, slots - 1):
                yield (first,) + rest

    return list(rec(k, m))


def barycentric(y: Sequence[int], k: int) -> Point:
    return tuple(Fraction(v, k) for v in y)


def _to_y(u: Sequence[int], k: int) -> tuple[int, ...]:
    prev = 0
    y = []
    for val in u:
        y.append(val - prev)
        prev = val
    y.append(k - prev)
    return tuple(y)


@dataclass(frozen=True, order=True)
class Cell:
    k: int
    base: tuple[int, ...]
    perm: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.base) + 1

    def cumulative_vertices(self) -> list[tuple[int, ...]]:
        u = list(self.base)
        out = [tuple(u)]
        for t in self.perm:
            u[t] += 1
            out.append(tuple(u))
        return out

    @property
    def vertices(self) -> tuple[tuple[int, ...], ...]:
        return tuple(_to_y(u, self.k) for u in self.cumulative_vertices())

    def points(self) -> list[Point]:
        return [barycentric(y, self.k) for y in self.vertices]

    def centroid(self) -> Point:
        m = self.m
        sums = [sum(col) for col in zip(*self.vertices)]
        return tuple(Fraction(s, m * self.k) for s in sums)

    def is_valid(self) -> bool:
        return all(v >= 0 for y in self.vertices for v in y)


def _cells_from_bases(k: int, bases) -> Iterator[Cell]:
    for base in bases:
        d = len(base)
        for perm in itertools.permutations(range(d)):
            # within a run of equal base coordinates, the later index must step first
            ok = True
            for t in range(d - 1):
                if base[t] == base[t + 1] and perm.index(t + 1) > perm.index(t):
                    ok = False
                    break
            if ok:
                yield Cell(k, tuple(base), perm)


def cells(m: int, k: int) -> Iterator[Cell]:
    """Every Kuhn cell of resolution k, in (base, permutation) lexicographic order."""
    _check(m, k)
    return _cells_from_bases(k, itertools.combinations_with_replacement(range(k), m - 1))


def cell_count(m: int, k: int) -> int:
    return k ** (m - 1)


def locate(x: Sequence, k: int) -> Cell:
    """A cell of resolution k containing the barycentric point x."""
    x = [Fraction(v) for v in x]
    d = len(x) - 1
    cum = list(itertools.accumulate(x[:-1]))
    u = [k * c for c in cum]
    base = tuple(min(math.floor(v), k - 1) for v in u)
    frac = [u[t] - base[t] for t in range(d)]
    perm = tuple(sorted(range(d), key=lambda t: (-frac[t], -t)))
    return Cell(k, base, perm)


def cells_near(cell: Cell, growth: int, radius: int) -> list[Cell]:
    """Cells of resolution growth*k lying within `radius` old cells of `cell`.

    The neighbourhood is the box of old cells around the old base, refined;
    cells come back in global iteration order.
    """
    k_new = cell.k * growth
    lo = [max(0, growth * (b - radius)) for b in cell.base]
    hi = [min(k_new - 1, growth * (b + 1 + radius) - 1) for b in cell.base]
    ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
    bases = (b for b in itertools.product(*ranges) if all(b[t] <= b[t + 1] for t in range(len(b) - 1)))
    return list(_cells_from_bases(k_new, bases))


def covers_everything(cell: Cell, growth: int, radius: int) -> bool:
    return all(growth * (b - radius) <= 0 and growth * (b + 1 + radius) >= cell.k * growth for b in cell.base)


# ---------------------------------------------------------------------------
# price maps


def price_map_compensable(x: Sequence, bound, rent) -> tuple[Fraction, ...]:
    """p_j = T - (T*m - R) x_j; the prices always sum to R.

    >>> price_map_compensable([1, 0, 0], 1000, 1000)
    (Fraction(-1000, 1), Fraction(1000, 1), Fraction(1000, 1))
    """
    bound, rent = Fraction(bound), Fraction(rent)
    if bound < rent:
        raise ValueError(f"compensation bound {bound} is below the rent {rent}")
    scale = bound * len(x) - rent
    return tuple(bound - scale * Fraction(v) for v in x)


def price_map_reciprocal(x: Sequence) -> tuple:
    """p_j = 1 / x_j, infinite where x_j = 0."""
    return tuple(math.inf if v == 0 else 1 / Fraction(v) for v in x)


def price_map_su(x: Sequence, rent) -> tuple[Fraction, ...]:
    """p_j = R x_j."""
    rent = Fraction(rent)
    return tuple(rent * Fraction(v) for v in x)


@dataclass(frozen=True)
class PriceMap:
    kind: str
    bound: Fraction | None = None
    rent: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("compensable", "reciprocal", "su"):
            raise ValueError(f"unknown price map {self.kind!r}")
        if self.kind == "compensable" and (self.bound is None or self.rent is None):
            raise ValueError("the compensable map needs both T and R")
        if self.kind == "su" and self.rent is None:
            raise ValueError("the su map needs R")

    def __call__(self, x: Sequence) -> tuple:
        if self.kind == "compensable":
            return price_map_compensable(x, self.bound, self.rent)
        if self.kind == "reciprocal":
            return price_map_reciprocal(x)
        return price_map_su(x, self.rent)


def _gap(a, b):
    if a == math.inf and b == math.inf:
        return 0
    if a == math.inf or b == math.inf:
        return math.inf
    return abs(a - b)


def cell_geometry(cell: Cell, price_map: PriceMap) -> tuple[Point, Fraction | float]:
    """Centroid and max-norm price diameter of a cell under a price map."""
    prices = [price_map(p) for p in cell.points()]
    diameter: Fraction | float = Fraction(0)
    for p, q in itertools.combinations(prices, 2):
        diameter = max(diameter, max(_gap(a, b) for a, b in zip(p, q)))
    return cell.centroid(), diameter
