import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from helpers import brute_force_envy_free_assignments, lp_price_extreme
from rental_harmony.engine import verify
from rental_harmony.quasilinear import (
    NotWelfareMaximizing,
    envy_free_prices,
    envy_regrets,
    max_weight_assignment,
    solve_instance_exact,
    solve_quasilinear_exact,
    welfare,
)
from helpers import quasilinear_instance

F = Fraction
BEDROOM = [[150, 0], [140, 10]]


def random_values(rng, n, hi=20):
    return [[rng.randint(0, hi) for _ in range(n)] for _ in range(n)]


def test_assignment_examples():
    assert max_weight_assignment(BEDROOM) == (0, 1)
    assert welfare(BEDROOM, (0, 1)) == 160
    assert max_weight_assignment([[1, 0], [0, 1]]) == (0, 1)
    assert max_weight_assignment([[5, 5], [5, 5]]) == (0, 1)


def test_bedroom_prices():
    p = envy_free_prices(BEDROOM, (0, 1), 100)
    assert p == (115, -15)
    # -15 is the largest basement price any envy-free vector allows
    assert lp_price_extreme(BEDROOM, (0, 1), 100, room=1) == pytest.approx(-15)


def test_symmetric_example_uses_anchor_convention():
    p = envy_free_prices([[1, 0], [0, 1]], (0, 1), 0)
    assert p == (F(-1, 2), F(1, 2))
    assert sum(p) == 0
    assert envy_regrets([[1, 0], [0, 1]], (0, 1), p) == (0, 0)
    lo = lp_price_extreme([[1, 0], [0, 1]], (0, 1), 0, room=1, maximize=False)
    hi = lp_price_extreme([[1, 0], [0, 1]], (0, 1), 0, room=1, maximize=True)
    assert lo == pytest.approx(-0.5) and hi == pytest.approx(0.5)


def test_single_agent():
    assert solve_quasilinear_exact([[7]], 100)[1] == (100,)


def test_non_optimal_assignment_is_rejected():
    with pytest.raises(NotWelfareMaximizing):
        envy_free_prices(BEDROOM, (1, 0), 100)
    with pytest.raises(ValueError):
        envy_free_prices(BEDROOM, (0, 0), 100)


def test_identical_agents_are_indifferent():
    sigma, p, cert = solve_quasilinear_exact([[3, 1, 4]] * 3, 31)
    assert sum(p) == 31 and cert.max_regret == 0
    assert envy_regrets([[3, 1, 4]] * 3, sigma, p) == (0, 0, 0)


def test_solution_passes_engine_verify_exactly():
    rng = random.Random(9)
    for _ in range(20):
        values = [[F(rng.randint(-40, 40), rng.randint(1, 5)) for _ in range(4)] for _ in range(4)]
        inst = quasilinear_instance(values, F(rng.randint(0, 300), 7), bound=500)
        sol = solve_instance_exact(inst)
        assert sol.diagnostics.solver == "exact"
        assert verify(inst, sol, 0).passed


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_hungarian_matches_scipy(n):
    rng = random.Random(n)
    for _ in range(30):
        v = random_values(rng, n, 30)
        rows, cols = linear_sum_assignment(np.array(v), maximize=True)
        best = sum(v[r][c] for r, c in zip(rows, cols))
        sigma = max_weight_assignment(v)
        assert welfare(v, sigma) == best
        optimal = [s for s in itertools.permutations(range(n)) if welfare(v, s) == best]
        assert sigma == min(optimal)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_envy_free_iff_welfare_maximizing(n):
    rng = random.Random(100 + n)
    for _ in range(8 if n == 4 else 15):
        v = random_values(rng, n, 6)
        best = max(welfare(v, s) for s in itertools.permutations(range(n)))
        optimal = {s for s in itertools.permutations(range(n)) if welfare(v, s) == best}
        assert set(brute_force_envy_free_assignments(v)) == optimal
        sigma, p, cert = solve_quasilinear_exact(v, 50)
        assert sigma in optimal and cert.max_regret == 0 and sum(p) == 50


def test_shift_invariance_per_agent():
    rng = random.Random(11)
    for _ in range(50):
        v = random_values(rng, 4, 25)
        sigma, p, _ = solve_quasilinear_exact(v, 100)
        i, c = rng.randrange(4), F(rng.randint(-50, 50), 3)
        shifted = [row[:] for row in v]
        shifted[i] = [x + c for x in shifted[i]]
        assert solve_quasilinear_exact(shifted, 100)[:2] == (sigma, p)


def test_exact_solver_rejects_other_modes():
    inst = quasilinear_instance([[1, 2], [3, 4], [5, 6]], 10, bound=10, mode="extra")
    with pytest.raises(ValueError):
        solve_instance_exact(inst)
