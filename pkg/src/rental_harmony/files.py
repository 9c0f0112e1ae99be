"""
JSON instance and solution files.

Rationals travel as strings: canonical ``"p/q"`` (or an integer) in exact
fields, and a decimal rendering next to them for human readers. Keys are
emitted in a fixed order.
"""

from __future__ import annotations

import json
import math
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from rental_harmony.domain import Certificate, Instance, InstanceError, to_fraction, validate_instance
from rental_harmony.engine import Diagnostics, Solution, SolverConfig


class FileFormatError(ValueError):
    """A file could not be parsed; the message carries file:line:column."""


def decimal_string(value, digits: int = 15) -> str:
    """Decimal rendering of a rational with `digits` significant digits.

    >>> decimal_string(Fraction(1, 3)), decimal_string(Fraction(-15)), decimal_string(Fraction(5, 2))
    ('0.333333333333333', '-15', '2.5')
    """
    if value == math.inf:
        return "inf"
    value = Fraction(value)
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(value.numerator) / Decimal(value.denominator)
    text = format(d.normalize(), "f")
    return "0" if text in ("-0", "") else text


def exact_string(value) -> str:
    return "inf" if value == math.inf else str(Fraction(value))


def load_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"{path}: cannot read: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def dump_json(data: Any, path: str | Path | None) -> str:
    text = json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_instance(path: str | Path) -> tuple[Instance, dict]:
    """Parse and validate an instance file; also returns its raw solver block."""
    raw = load_json(path)
    try:
        instance = validate_instance(raw)
    except InstanceError as exc:
        raise FileFormatError(f"{path}: {exc}") from None
    solver = raw.get("solver") or {}
    if not isinstance(solver, Mapping):
        raise FileFormatError(f"{path}: 'solver' must be an object")
    return instance, dict(solver)


def config_from_dict(raw: Mapping[str, Any], **overrides) -> SolverConfig:
    fields = {
        "k0": ("k0", int),
        "growth": ("growth", int),
        "tolP": ("tol_price", to_fraction),
        "epsilon": ("epsilon", to_fraction),
        "maxRounds": ("max_rounds", int),
        "radius": ("radius", int),
        "workers": ("workers", int),
    }
    kwargs = {}
    for key, (name, conv) in fields.items():
        if raw.get(key) is not None:
            kwargs[name] = conv(raw[key])
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig(**kwargs)


def _rational_or_null(value):
    return None if value is None else exact_string(value)


def certificate_to_dict(cert: Certificate) -> dict[str, Any]:
    out: dict[str, Any] = {
        "envyFree": cert.envy_free,
        "maxRegret": "not-applicable" if cert.max_regret is None else exact_string(cert.max_regret),
        "epsilon": exact_string(cert.epsilon),
        "regrets": [_rational_or_null(r) for r in cert.regrets],
    }
    if cert.violations:
        out["violations"] = list(cert.violations)
    return out


def solution_to_dict(solution: Solution) -> dict[str, Any]:
    out: dict[str, Any] = {
        "mode": solution.mode,
        "prices": [decimal_string(p) for p in solution.prices],
        "pricesExact": [exact_string(p) for p in solution.prices],
    }
    if solution.assignment is not None:
        out["assignment"] = {str(j): list(agents) for j, agents in sorted(solution.assignment.items())}
    if solution.scenarios is not None:
        out["scenarios"] = {
            str(key): {str(i): j for i, j in sorted(match.items())}
            for key, match in sorted(solution.scenarios.items())
        }
    if solution.certificate is not None:
        out["certificate"] = certificate_to_dict(solution.certificate)
    d = solution.diagnostics
    out["diagnostics"] = {
        "solver": d.solver,
        "rounds": d.rounds,
        "finalK": d.final_k,
        "cellsScanned": d.cells_scanned,
        "oracleCalls": d.oracle_calls,
        "boundaryLabels": d.boundary_labels,
        "fallbacks": d.fallbacks,
        "wallTimeMs": round(d.wall_time_ms, 3),
    }
    return out


def solution_from_dict(raw: Mapping[str, Any]) -> Solution:
    if not isinstance(raw, Mapping):
        raise FileFormatError("solution must be a JSON object")
    try:
        exact = raw.get("pricesExact") or raw["prices"]
        prices = tuple(to_fraction(p) for p in exact)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise FileFormatError(f"bad prices: {exc}") from None
    assignment = scenarios = None
    try:
        if "assignment" in raw:
            assignment = {int(j): tuple(int(i) for i in agents) for j, agents in raw["assignment"].items()}
        if "scenarios" in raw:
            scenarios = {
                int(key): {int(i): int(j) for i, j in match.items()} for key, match in raw["scenarios"].items()
            }
    except (AttributeError, TypeError, ValueError) as exc:
        raise FileFormatError(f"bad assignment: {exc}") from None
    diag = Diagnostics(solver=str(raw.get("diagnostics", {}).get("solver", "unknown")))
    return Solution(str(raw.get("mode", "")), prices, assignment, scenarios, diagnostics=diag)


def write_solution(solution: Solution, path: str | Path | None) -> str:
    return dump_json(solution_to_dict(solution), path)
