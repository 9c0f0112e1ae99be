"""
Exact envy-free rent division for quasilinear tenants.

A welfare-maximizing assignment is computed with an exact-rational Hungarian
method. Envy-freeness then reduces to difference constraints between room
prices, solved by shortest paths, and the prices are shifted uniformly so
they sum to the rent.
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import Sequence

from rental_harmony.domain import Certificate


class NotWelfareMaximizing(RuntimeError):
    """The envy constraints contain a positive cycle."""


def _matrix(values: Sequence[Sequence]) -> list[list[Fraction]]:
    v = [[Fraction(x) for x in row] for row in values]
    n = len(v)
    if n == 0 or any(len(row) != n for row in v):
        raise ValueError("value matrix must be square and nonempty")
    return v


def _hungarian_max(v: list[list[Fraction]]) -> Fraction:
    """Optimal assignment weight (maximization) via row/column potentials."""
    n = len(v)
    if n == 0:
        return Fraction(0)
    cost = [[-x for x in row] for row in v]
    u = [Fraction(0)] * (n + 1)
    w = [Fraction(0)] * (n + 1)
    owner = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv: list = [None] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = owner[j0]
            delta = None
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - w[j]
                if minv[j] is None or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is None or minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[owner[j]] += delta
                    w[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    return sum((v[owner[j] - 1][j - 1] for j in range(1, n + 1)), Fraction(0))


def max_weight_assignment(values: Sequence[Sequence]) -> tuple[int, ...]:
    """Welfare-maximizing agent -> room permutation, lexicographically smallest among optima.

    >>> max_weight_assignment([[150, 0], [140, 10]])
    (0, 1)
    >>> max_weight_assignment([[5, 5], [5, 5]])
    (0, 1)
    """
    v = _matrix(values)
    n = len(v)
    agents = list(range(n))
    rooms = list(range(n))
    target = _hungarian_max(v)
    sigma = [0] * n
    for i in range(n):
        rest_agents = agents[i + 1:]
        for j in rooms:
            left = [r for r in rooms if r != j]
            sub = [[v[a][r] for r in left] for a in rest_agents]
            if v[i][j] + _hungarian_max(sub) == target:
                sigma[i] = j
                target -= v[i][j]
                rooms = left
                break
    return tuple(sigma)


def welfare(values: Sequence[Sequence], sigma: Sequence[int]) -> Fraction:
    return sum((Fraction(values[i][j]) for i, j in enumerate(sigma)), Fraction(0))


def envy_free_prices(values: Sequence[Sequence], sigma: Sequence[int], rent) -> tuple[Fraction, ...]:
    """Tight envy-free prices for assignment sigma, summing to `rent`.

    Agent i in room s_i does not envy room r iff p[s_i] <= p[r] + v[i][s_i] - v[i][r].
    Bellman-Ford from the anchor room s_0 gives the tightest such prices.

    >>> envy_free_prices([[150, 0], [140, 10]], (0, 1), 100)
    (Fraction(115, 1), Fraction(-15, 1))
    """
    v = _matrix(values)
    n = len(v)
    rent = Fraction(rent)
    if sorted(sigma) != list(range(n)):
        raise ValueError("sigma must be a permutation")
    arcs = [(r, sigma[i], v[i][sigma[i]] - v[i][r]) for i in range(n) for r in range(n) if r != sigma[i]]
    dist: list = [None] * n
    dist[sigma[0]] = Fraction(0)
    for _ in range(n - 1):
        changed = False
        for a, b, c in arcs:
            if dist[a] is not None and (dist[b] is None or dist[a] + c < dist[b]):
                dist[b] = dist[a] + c
                changed = True
        if not changed:
            break
    for a, b, c in arcs:
        if dist[a] + c < dist[b]:
            raise NotWelfareMaximizing("envy constraints are cyclic; the assignment is not welfare-maximizing")
    shift = (rent - sum(dist)) / n
    return tuple(d + shift for d in dist)


def envy_regrets(values: Sequence[Sequence], sigma: Sequence[int], prices: Sequence) -> tuple[Fraction, ...]:
    """Per agent: best utility minus own utility (zero means no envy)."""
    v = _matrix(values)
    out = []
    for i, row in enumerate(v):
        utils = [row[j] - prices[j] for j in range(len(row))]
        out.append(max(utils) - utils[sigma[i]])
    return tuple(out)


def solve_quasilinear_exact(values: Sequence[Sequence], rent):
    """Assignment, prices and a zero-regret certificate.

    Returns ``(sigma, prices, certificate)`` where ``sigma[i]`` is agent i's room.
    """
    sigma = max_weight_assignment(values)
    prices = envy_free_prices(values, sigma, rent)
    regrets = envy_regrets(values, sigma, prices)
    top = max(regrets)
    cert = Certificate(envy_free=top == 0, max_regret=top, epsilon=Fraction(0), regrets=regrets)
    return sigma, prices, cert


def solve_instance_exact(instance):
    """Exact solution of a classic all-quasilinear instance, as an engine Solution."""
    from rental_harmony.engine import Diagnostics, Solution

    if instance.mode != "classic" or not instance.all_quasilinear():
        raise ValueError("the exact solver handles classic instances with quasilinear tenants only")
    start = time.perf_counter()
    values = [a.oracle.values for a in instance.agents]
    sigma, prices, cert = solve_quasilinear_exact(values, instance.total_rent)
    assignment = {j: tuple(i for i, r in enumerate(sigma) if r == j) for j in range(len(sigma))}
    diag = Diagnostics(solver="exact", wall_time_ms=(time.perf_counter() - start) * 1000)
    return Solution(instance.mode, prices, assignment, certificate=cert, diagnostics=diag)
