"""
Three flatmates, a double room and a single.

Each tenant's utility for a room is value minus price, plus a small term
that depends on the most expensive room in the flat (a pricey flat feels
nicer, or worse). Before solving we screen every tenant with the sampling
validator: the engine is only guaranteed to work for compensable tenants.
"""

from pathlib import Path

from rental_harmony.engine import MeshSolver, SolverConfig, verify
from rental_harmony.files import read_instance
from rental_harmony.preferences import validate_assumption

HERE = Path(__file__).parent


def main():
    instance, _ = read_instance(HERE / "instances" / "shared_flat.json")
    T = instance.compensation_bound
    for agent in instance.agents:
        report = validate_assumption(agent.oracle, "compensable", instance.n_rooms, T, sample_count=1000)
        print(f"{agent.name}: compensable on {report.samples} samples: {report.passed}")

    eps = instance.total_rent / 1000
    solution = MeshSolver(instance, SolverConfig(epsilon=eps)).solve()
    for j, agents in sorted(solution.assignment.items()):
        room = instance.rooms[j]
        names = ", ".join(instance.agents[i].name for i in agents)
        print(f"{room.name} (sleeps {room.capacity}): {names}, room price {float(solution.prices[j]):.3f}")
    print("verified:", verify(instance, solution, eps).passed)


if __name__ == "__main__":
    main()
