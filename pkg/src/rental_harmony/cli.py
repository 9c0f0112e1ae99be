"""
Command-line front end.

Subcommands::

    rental-harmony solve    -i instance.json [-o solution.json] [--force-mesh] ...
    rental-harmony verify   -i instance.json -s solution.json [--epsilon E]
    rental-harmony validate -i instance.json --kind compensable [--samples N] [--seed S]
    rental-harmony mesh     --m M --k K [--map compensable --T T --R R] --dump [-o mesh.json]

Exit codes: 0 success, 1 input/usage error, 2 assumption violation,
3 refinement rounds exhausted, 4 verification found envy.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from typing import Sequence

from rental_harmony.domain import to_fraction
from rental_harmony.engine import AssumptionViolation, MaxRoundsExceeded, MeshSolver, verify
from rental_harmony.files import (
    FileFormatError,
    config_from_dict,
    decimal_string,
    dump_json,
    exact_string,
    load_json,
    read_instance,
    solution_from_dict,
    write_solution,
)
from rental_harmony.mesh import PriceMap, barycentric, cells, grid_vertices
from rental_harmony.preferences import ASSUMPTIONS, validate_assumption
from rental_harmony.quasilinear import solve_instance_exact

EXIT_OK, EXIT_INPUT, EXIT_ASSUMPTION, EXIT_ROUNDS, EXIT_ENVY = 0, 1, 2, 3, 4


def _err(msg: str) -> None:
    print(f"rental-harmony: {msg}", file=sys.stderr)


def cmd_solve(args) -> int:
    instance, solver_raw = read_instance(args.input)
    workers = args.workers
    if workers is None and os.environ.get("HARMONY_WORKERS"):
        workers = int(os.environ["HARMONY_WORKERS"])
    config = config_from_dict(
        solver_raw,
        epsilon=None if args.epsilon is None else to_fraction(args.epsilon),
        k0=args.k0,
        max_rounds=args.max_rounds,
        workers=workers,
    )
    if instance.mode == "classic" and instance.all_quasilinear() and not args.force_mesh:
        solution = solve_instance_exact(instance)
    else:
        try:
            solution = MeshSolver(instance, config).solve()
        except AssumptionViolation as exc:
            _err(f"assumption violated: {exc}")
            return EXIT_ASSUMPTION
        except MaxRoundsExceeded as exc:
            _err(str(exc))
            return EXIT_ROUNDS
    text = write_solution(solution, args.output)
    if args.output is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    instance, _ = read_instance(args.input)
    raw = load_json(args.solution)
    solution = solution_from_dict(raw)
    if len(solution.prices) != instance.n_rooms:
        raise FileFormatError(f"{args.solution}: {len(solution.prices)} prices for {instance.n_rooms} rooms")
    if args.epsilon is not None:
        eps = to_fraction(args.epsilon)
    elif isinstance(raw.get("certificate"), dict) and "epsilon" in raw["certificate"]:
        eps = to_fraction(raw["certificate"]["epsilon"])
    else:
        eps = Fraction(1, 10**6) * max(abs(instance.total_rent), instance.compensation_bound)
    cert = verify(instance, solution, eps)
    for i, agent in enumerate(instance.agents):
        r = cert.regrets[i] if i < len(cert.regrets) else None
        shown = "n/a" if r is None else decimal_string(r)
        print(f"agent {i} ({agent.name}): regret {shown}")
    for key, sub in sorted(cert.scenarios.items()):
        label = "pick" if instance.mode == "secretive" else "leaver"
        print(f"{label} {key}: {'ok' if sub.passed else 'FAIL'}")
    for v in cert.violations:
        print(f"violation: {v}")
    status = "envy-free" if cert.passed else "NOT envy-free"
    print(f"{status} at epsilon {exact_string(eps)}")
    return EXIT_OK if cert.passed else EXIT_ENVY


def cmd_validate(args) -> int:
    if args.kind not in ASSUMPTIONS:
        raise FileFormatError(f"unknown assumption kind {args.kind!r}; expected one of {', '.join(ASSUMPTIONS)}")
    instance, _ = read_instance(args.input)
    all_pass = True
    for i, agent in enumerate(instance.agents):
        report = validate_assumption(
            agent.oracle, args.kind, instance.n_rooms, instance.compensation_bound, args.samples, args.seed + i
        )
        if report.passed:
            print(f"agent {i} ({agent.name}): pass ({report.samples} samples)")
        else:
            all_pass = False
            shown = [exact_string(p) for p in report.counterexample]
            print(
                f"agent {i} ({agent.name}): FAIL at prices {shown}, best rooms {sorted(report.best_at_counterexample)}"
            )
    print(f"note: {report.note}")
    return EXIT_OK if all_pass else EXIT_ENVY


def cmd_mesh(args) -> int:
    m, k = args.m, args.k
    bound = None if args.T is None else to_fraction(args.T)
    rent = None if args.R is None else to_fraction(args.R)
    try:
        verts = grid_vertices(m, k)
    except ValueError as exc:
        raise FileFormatError(str(exc)) from None
    cell_list = list(cells(m, k))
    if not args.dump:
        print(f"m={m} k={k}: {len(verts)} vertices, {len(cell_list)} cells")
        return EXIT_OK
    try:
        pmap = PriceMap(args.map, bound, rent)
    except ValueError as exc:
        raise FileFormatError(str(exc)) from None
    if pmap.kind == "compensable" and bound < rent:
        raise FileFormatError(f"T={bound} is below R={rent}; the map needs T ≥ R")
    index = {y: n for n, y in enumerate(verts)}
    data = {
        "m": m,
        "k": k,
        "map": pmap.kind,
        "vertices": [
            {
                "y": list(y),
                "x": [exact_string(v) for v in barycentric(y, k)],
                "prices": [exact_string(p) for p in pmap(barycentric(y, k))],
            }
            for y in verts
        ],
        "cells": [[index[y] for y in c.vertices] for c in cell_list],
    }
    text = dump_json(data, args.output)
    if args.output is None:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rental-harmony", description="Envy-free rent division.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute an envy-free allocation")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--epsilon")
    p.add_argument("--k0", type=int)
    p.add_argument("--max-rounds", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--force-mesh", action="store_true", help="use the mesh engine even for quasilinear tenants")
    p.add_argument("--seed", type=int, default=0, help="accepted for symmetry; solving is deterministic")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a solution file for envy")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-s", "--solution", required=True)
    p.add_argument("--epsilon")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("validate", help="sample-check an assumption on every oracle")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--kind", required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("mesh", help="inspect the triangulation and price maps")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--map", default="compensable", choices=["compensable", "reciprocal", "su"])
    p.add_argument("--T")
    p.add_argument("--R")
    p.add_argument("--dump", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_mesh)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (FileFormatError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
