"""
Rent division when not everyone is known yet, or someone is about to leave.

Secretive: two tenants are known, a third will arrive later and pick any
room. The prices are fixed now, and whichever room the newcomer takes, the
two known tenants can split the other two without envy.

Extra: three tenants want two rooms. The prices are fixed now, and whoever
drops out, the other two can be housed without envy.
"""

from pathlib import Path

from rental_harmony.engine import MeshSolver, verify
from rental_harmony.files import config_from_dict, read_instance

HERE = Path(__file__).parent


def run(filename, heading, describe):
    instance, raw_config = read_instance(HERE / "instances" / filename)
    config = config_from_dict(raw_config)
    solution = MeshSolver(instance, config).solve()
    rooms = [r.name for r in instance.rooms]
    print(heading)
    print("  prices:", ", ".join(f"{rooms[j]} {float(p):.2f}" for j, p in enumerate(solution.prices)))
    for key, match in sorted(solution.scenarios.items()):
        pairs = ", ".join(f"{instance.agents[i].name}->{rooms[j]}" for i, j in sorted(match.items()))
        print(f"  {describe(instance, key)}: {pairs}")
    cert = verify(instance, solution, config.resolved_epsilon(instance))
    print("  every scenario verified:", cert.passed)


def main():
    run("secret_newcomer.json", "secretive newcomer",
        lambda inst, r: f"newcomer takes {inst.rooms[r].name}")
    run("one_too_many.json", "\none tenant too many",
        lambda inst, i: f"{inst.agents[i].name} leaves")


if __name__ == "__main__":
    main()
