"""
Two tenants, a bedroom and a basement, rent 100.

Ana values the bedroom at 150 and the basement at 0. Ben values them at 140
and 10. Both want the bedroom, and no split with nonnegative prices keeps
both happy: Ben envies Ana unless the bedroom costs at least 130 more than
the basement. So the basement has to come with a payment.

We solve it twice: exactly (Hungarian assignment plus tight prices) and with
the simplicial engine, then check both answers independently.
"""

from fractions import Fraction
from pathlib import Path

from rental_harmony.engine import MeshSolver, SolverConfig, verify
from rental_harmony.files import read_instance
from rental_harmony.quasilinear import solve_instance_exact

HERE = Path(__file__).parent


def show(label, instance, solution):
    rooms = [r.name for r in instance.rooms]
    for j, agents in sorted(solution.assignment.items()):
        names = ", ".join(instance.agents[i].name for i in agents)
        print(f"  {rooms[j]:>9}: {names:<4} pays {solution.prices[j]}")
    print(f"  ({label}; prices sum to {sum(solution.prices)})")


def main():
    instance, _ = read_instance(HERE / "instances" / "bedroom_basement.json")

    exact = solve_instance_exact(instance)
    print("exact solver")
    show("tight prices", instance, exact)

    eps = Fraction(1, 100)
    solver = MeshSolver(instance, SolverConfig(epsilon=eps))
    mesh = solver.solve()
    d = mesh.diagnostics
    print("\nsimplicial engine")
    show(f"{d.rounds} rounds, final k={d.final_k}, {d.oracle_calls} oracle calls", instance, mesh)

    # verify re-asks the tenants; it knows nothing about meshes
    for name, sol, tol in [("exact", exact, 0), ("engine", mesh, eps)]:
        cert = verify(instance, sol, tol)
        print(f"{name}: envy-free={cert.envy_free}, max regret {cert.max_regret}")


if __name__ == "__main__":
    main()
