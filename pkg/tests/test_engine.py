import random
from fractions import Fraction

import pytest

from helpers import oracle_instance, quasilinear_instance, sperner_violations
from rental_harmony.domain import AgentSpec, Instance, RoomSpec
from rental_harmony.engine import (
    AssumptionViolation,
    MaxRoundsExceeded,
    MeshSolver,
    Solution,
    SolverConfig,
    cell_demand_graph,
    epsilon_graph,
    find_feasible_cell,
    label_vertex,
    mode_marginals,
    shift_to_sum,
    solve,
    verify,
)
from rental_harmony.matching import marginals
from rental_harmony.mesh import cells, price_map_compensable
from rental_harmony.preferences import CustomOracle
from rental_harmony.quasilinear import max_weight_assignment, welfare

F = Fraction
BEDROOM = [[150, 0], [140, 10]]
OPPOSITES = quasilinear_instance([[100, 0], [0, 100]], 100, bound=150)


def greedy_instance():
    greedy = CustomOracle(3, demand=lambda p: [max(range(3), key=lambda j: (p[j], -j))])
    agents = tuple(AgentSpec(f"a{i}", greedy) for i in range(3))
    rooms = tuple(RoomSpec(f"r{j}") for j in range(3))
    return Instance("classic", agents, rooms, F(90), F(100))


def cell_with(k, m, vertices):
    return next(c for c in cells(m, k) if set(c.vertices) == set(vertices))


# -- labels -------------------------------------------------------------------


def test_boundary_label_example():
    inst = quasilinear_instance([[800, 100, 100]] * 3, 1000, bound=1000)
    assert price_map_compensable([0, 1, 0], 1000, 1000) == (1000, -1000, 1000)
    assert label_vertex(inst, 0, (0, 4, 0), 4) == 1


def test_interior_labels_are_best_rooms():
    inst = quasilinear_instance([[800, 100, 100], [0, 50, 60], [5, 5, 5]], 1000, bound=1000)
    solver = MeshSolver(inst)
    for y in [(2, 1, 1), (1, 2, 1), (1, 1, 2)]:
        solver.vertex_labels(y, 4)
    assert sperner_violations(solver) == (0, 0)


def test_hand_computed_labels():
    # columns: y, then labels of agents 1 and 2 (prices 150 - 200 x_j)
    expected = {(4, 0): (0, 0), (3, 1): (0, 0), (2, 2): (0, 1), (1, 3): (0, 1), (0, 4): (1, 1)}
    solver = MeshSolver(OPPOSITES)
    for y, labels in expected.items():
        assert solver.vertex_labels(y, 4) == labels


def test_non_compensable_oracle_raises():
    inst = greedy_instance()
    with pytest.raises(AssumptionViolation) as info:
        label_vertex(inst, 0, (0, 1, 1), 2)
    assert info.value.agent == 0
    assert max(info.value.prices) == 100
    with pytest.raises(AssumptionViolation):
        find_feasible_cell(inst, 3)


# -- cells ----------------------------------------------------------------------


def test_star_graph_when_labels_coincide():
    inst = quasilinear_instance([[100, 0, 0]] * 3, 10, bound=10)
    cell = cell_with(8, 3, [(8, 0, 0), (7, 1, 0), (7, 0, 1)])
    assert cell_demand_graph(inst, cell).edges == ((0, 0), (1, 0), (2, 0))


def test_barycenter_cells_separate_the_agents():
    for vertices in ([(1, 3), (2, 2)], [(2, 2), (3, 1)]):
        g = cell_demand_graph(OPPOSITES, cell_with(4, 2, vertices))
        assert (0, 0) in g.edges and (1, 1) in g.edges


def test_first_feasible_cell_hand_computed():
    cell, w = find_feasible_cell(OPPOSITES, 4)
    assert set(cell.vertices) == {(0, 4), (1, 3)}
    assert w == {(0, 0): F(1, 2), (0, 1): 0, (1, 1): F(1, 2)}
    graph = cell_demand_graph(OPPOSITES, cell)
    assert marginals(graph, w) == ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))
    last = cell_with(4, 2, [(3, 1), (4, 0)])
    assert find_feasible_cell(OPPOSITES, 4, [last]) is None


def test_single_room():
    inst = quasilinear_instance([[7]], 100, bound=100)
    cell, w = find_feasible_cell(inst, 4)
    assert w == {(0, 0): 1}
    sol = solve(inst)
    assert sol.prices == (100,) and sol.assignment == {0: (0,)}
    assert verify(inst, sol, 0).passed


def test_witness_marginals_match_mode():
    inst = quasilinear_instance([[3, 1, 0], [0, 2, 2], [1, 1, 5]], 9, bound=12)
    solver = MeshSolver(inst)
    cell, w = solver.find_feasible_cell(8)
    assert marginals(solver.cell_graph(cell), w) == solver.marginals


def test_mode_marginals():
    assert mode_marginals("classic", 2, [1, 1]) == ((F(1, 2),) * 2, (F(1, 2),) * 2)
    assert mode_marginals("roommates", 3, [2, 1]) == ((F(1, 3),) * 3, (F(2, 3), F(1, 3)))
    assert mode_marginals("secretive", 2, [1, 1, 1]) == ((F(1, 2),) * 2, (F(1, 3),) * 3)
    assert mode_marginals("extra", 4, [1, 1, 1]) == ((F(1, 4),) * 4, (F(1, 3),) * 3)


# -- solve ----------------------------------------------------------------------


def test_bedroom_example():
    inst = quasilinear_instance(BEDROOM, 100, bound=250)
    sol = solve(inst, SolverConfig(epsilon=F(1, 100)))
    assert sol.assignment == {0: (0,), 1: (1,)}
    assert sum(sol.prices) == 100
    assert sol.prices[1] <= -15 + F(1, 100)
    assert sol.certificate.passed


def test_symmetric_agents():
    inst = quasilinear_instance([[50, 50], [50, 50]], 100, bound=100)
    sol = solve(inst)
    assert sol.prices == (50, 50)
    assert sorted(sol.assignment.values()) == [(0,), (1,)]
    assert sol.certificate.max_regret == 0


def test_secretive_single_agent():
    inst = quasilinear_instance([[100, 0]], 100, bound=200, mode="secretive", n_rooms=2)
    sol = solve(inst, SolverConfig(epsilon=F(1, 10)))
    assert sol.prices[0] == pytest.approx(100, abs=1) and sum(sol.prices) == 100
    assert sol.scenarios == {0: {0: 1}, 1: {0: 0}}
    assert all(c.passed for c in sol.certificate.scenarios.values())


def test_engine_requires_room_for_the_map():
    inst = quasilinear_instance([[1, 0], [0, 1]], 0, bound=0)
    with pytest.raises(ValueError, match="T\\*m > R"):
        MeshSolver(inst)


def test_max_rounds_exceeded_carries_diagnostics():
    inst = quasilinear_instance([[10, 0, 3], [9, 1, 2], [0, 0, 7]], 30, bound=40)
    with pytest.raises(MaxRoundsExceeded) as info:
        solve(inst, SolverConfig(max_rounds=1, epsilon=F(1, 10**9)))
    assert info.value.diagnostics.rounds == 1


def test_refinement_diameters_shrink():
    inst = quasilinear_instance([[40, 10, 0], [30, 30, 0], [0, 10, 45]], 100, bound=145)
    sol = solve(inst, SolverConfig(epsilon=F(1, 10)))
    d = sol.diagnostics.diameters
    assert all(a >= b for a, b in zip(d, d[1:]))
    assert d[-1] <= F(3 * 145 - 100, sol.diagnostics.final_k)


def test_counters():
    solver = MeshSolver(quasilinear_instance([[1, 2, 3]] * 3, 10, bound=10))
    for c in cells(3, 2):
        solver.cell_graph(c)
    assert solver.diagnostics.oracle_calls == 3 * 6
    assert solver.diagnostics.boundary_labels == 3 * 6  # every k=2 vertex has a zero coordinate


@pytest.mark.parametrize("workers", [2, 3])
def test_worker_count_does_not_change_result(workers):
    values = [[20, 5, 0, 9], [3, 30, 2, 1], [8, 8, 8, 8], [0, 0, 25, 10]]
    inst = quasilinear_instance(values, 100, bound=130)
    base = solve(inst, SolverConfig(epsilon=F(1, 10)))
    par = solve(inst, SolverConfig(epsilon=F(1, 10), workers=workers))
    assert (par.prices, par.assignment, par.cell) == (base.prices, base.assignment, base.cell)
    assert par.diagnostics.cells_scanned == base.diagnostics.cells_scanned


def test_quasilinear_welfare_matches_optimum():
    rng = random.Random(21)
    for _ in range(6):
        values = [[rng.randint(0, 100) for _ in range(3)] for _ in range(3)]
        spread = max(max(r) - min(r) for r in values)
        inst = quasilinear_instance(values, 100, bound=100 + spread)
        solver = MeshSolver(inst, SolverConfig(epsilon=F(1, 10)))
        sol = solver.solve()
        sigma = [next(j for j, a in sol.assignment.items() if i in a) for i in range(3)]
        assert welfare(values, sigma) == welfare(values, max_weight_assignment(values))
        assert sperner_violations(solver)[0] == 0


def test_epsilon_graph():
    inst = quasilinear_instance(BEDROOM, 100, bound=250)
    # agent 2 is indifferent at the tight prices
    assert epsilon_graph(inst, (115, -15), 0).edges == ((0, 0), (1, 0), (1, 1))
    assert epsilon_graph(inst, (120, -20), 10).edges == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert epsilon_graph(inst, (120, -20), 1).edges == ((0, 0), (1, 1))


# -- shift and verify -------------------------------------------------------------


def test_shift_to_sum():
    assert shift_to_sum([0, 0], 100) == (50, 50)
    assert shift_to_sum([2, 2], 100) == (50, 50)
    assert shift_to_sum([4, F(4, 3)], F(16, 3)) == (4, F(4, 3))
    with pytest.raises(ValueError):
        shift_to_sum([float("inf"), 0], 1)


def test_verify_detects_envy():
    inst = quasilinear_instance(BEDROOM, 100, bound=250)
    good = Solution("classic", (F(115), F(-15)), {0: (0,), 1: (1,)})
    cert = verify(inst, good, 0)
    assert cert.envy_free and cert.max_regret == 0
    bad = Solution("classic", (F(115), F(-15)), {0: (1,), 1: (0,)})
    cert = verify(inst, bad, 0)
    assert not cert.passed
    assert cert.regrets[0] == 20


def test_verify_checks_sum_and_partition():
    inst = quasilinear_instance(BEDROOM, 100, bound=250)
    assert verify(inst, Solution("classic", (F(116), F(-15)), {0: (0,), 1: (1,)}), 1).violations
    assert verify(inst, Solution("classic", (F(115), F(-15)), {0: (0, 1), 1: ()}), 100).violations


def test_verify_single_room():
    inst = quasilinear_instance([[3]], 5, bound=5)
    assert verify(inst, Solution("classic", (F(5),), {0: (0,)}), 0).passed


def test_verify_secretive_missing_scenario():
    inst = quasilinear_instance([[100, 0]], 100, bound=200, mode="secretive", n_rooms=2)
    cert = verify(inst, Solution("secretive", (F(100), F(0)), scenarios={0: {0: 1}}), 1)
    assert not cert.passed and "missing scenario 1" in " ".join(cert.violations)


def test_roommates_solution():
    specs = [{"type": "quasilinear", "values": v} for v in ([10, 0], [8, 1], [0, 9])]
    inst = oracle_instance("roommates", specs, [2, 1], 60, 80)
    sol = solve(inst, SolverConfig(epsilon=F(1, 10)))
    assert sorted(len(a) for a in sol.assignment.values()) == [1, 2]
    assert len(sol.assignment[0]) == 2
    assert sol.certificate.passed
