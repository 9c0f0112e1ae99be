"""
Core data model: instances, allocations and envy certificates.

Agents and rooms are referred to by 0-based index in input order; names are
only used for display. Rent amounts are exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from rental_harmony.preferences import DemandOracle, QuasilinearOracle, oracle_from_dict

MODES = ("classic", "roommates", "secretive", "extra")

Price = Fraction | float  # float only for +inf
PriceVector = tuple[Price, ...]


class InstanceError(ValueError):
    """An instance description violates one of the model invariants."""


def to_fraction(value: Any) -> Fraction:
    """Parse an int, a decimal/ratio string or a float into an exact rational.

    >>> to_fraction("1/3"), to_fraction("0.1"), to_fraction(0.1), to_fraction(7)
    (Fraction(1, 3), Fraction(1, 10), Fraction(1, 10), Fraction(7, 1))
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {value!r}")
        # go through repr so that 0.1 means one tenth
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational number")


@dataclass(frozen=True)
class AgentSpec:
    name: str
    oracle: DemandOracle


@dataclass(frozen=True)
class RoomSpec:
    name: str
    capacity: int = 1


@dataclass(frozen=True)
class Instance:
    mode: str
    agents: tuple[AgentSpec, ...]
    rooms: tuple[RoomSpec, ...]
    total_rent: Fraction
    compensation_bound: Fraction
    # whether the bound was given explicitly or derived from quasilinear spreads
    bound_given: bool = True

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_rooms(self) -> int:
        return len(self.rooms)

    @property
    def capacities(self) -> tuple[int, ...]:
        return tuple(r.capacity for r in self.rooms)

    @property
    def oracles(self) -> tuple[DemandOracle, ...]:
        return tuple(a.oracle for a in self.agents)

    def all_quasilinear(self) -> bool:
        return all(isinstance(a.oracle, QuasilinearOracle) for a in self.agents)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "mode": self.mode,
            "totalRent": str(self.total_rent),
        }
        if self.bound_given:
            out["compensationBound"] = str(self.compensation_bound)
        out["rooms"] = [{"name": r.name, "capacity": r.capacity} for r in self.rooms]
        out["agents"] = [{"name": a.name, "oracle": a.oracle.to_dict()} for a in self.agents]
        return out


def quasilinear_bound(oracles: Sequence[DemandOracle], total_rent: Fraction) -> Fraction:
    """Smallest bound that works for quasilinear tenants: max(R, largest value spread)."""
    spread = max((max(o.values) - min(o.values) for o in oracles), default=Fraction(0))
    return max(total_rent, spread)


def check_counts(mode: str, n_agents: int, capacities: Sequence[int]) -> None:
    """Raise InstanceError if agent/room counts do not fit the mode."""
    m = len(capacities)
    if mode not in MODES:
        raise InstanceError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    if n_agents == 0 or m == 0:
        raise InstanceError("agents and rooms must be nonempty")
    for j, c in enumerate(capacities):
        if not isinstance(c, int) or isinstance(c, bool) or c < 1:
            raise InstanceError(f"room {j} has nonpositive capacity {c!r}")
    if mode != "roommates" and any(c != 1 for c in capacities):
        raise InstanceError(f"mode {mode} requires all capacities to be 1")
    if mode == "classic" and n_agents != m:
        raise InstanceError(f"classic mode needs as many agents as rooms, got {n_agents} agents and {m} rooms")
    if mode == "roommates":
        if sum(capacities) != n_agents:
            raise InstanceError(f"capacity sum {sum(capacities)} ≠ agent count {n_agents}")
        if m > n_agents:
            raise InstanceError(f"roommates mode needs at most {n_agents} rooms, got {m}")
    if mode == "secretive":
        if m < 2:
            raise InstanceError("secretive mode needs at least 2 rooms")
        if n_agents != m - 1:
            raise InstanceError(f"secretive mode needs {m - 1} present agents for {m} rooms, got {n_agents}")
    if mode == "extra" and n_agents != m + 1:
        raise InstanceError(f"extra mode needs {m + 1} agents for {m} rooms, got {n_agents}")


def validate_instance(raw: Mapping[str, Any]) -> Instance:
    """Build a validated Instance from a parsed instance description.

    >>> inst = validate_instance({
    ...     "mode": "classic", "totalRent": 1000, "compensationBound": 1000,
    ...     "rooms": [{"name": "a"}, {"name": "b"}],
    ...     "agents": [{"name": "x", "oracle": {"type": "quasilinear", "values": [1, 0]}},
    ...                {"name": "y", "oracle": {"type": "quasilinear", "values": [0, 1]}}]})
    >>> inst.n_agents, inst.total_rent
    (2, Fraction(1000, 1))
    """
    if not isinstance(raw, Mapping):
        raise InstanceError("instance must be a JSON object")
    try:
        mode = raw["mode"]
        rooms_raw = raw["rooms"]
        agents_raw = raw["agents"]
        rent_raw = raw["totalRent"]
    except KeyError as exc:
        raise InstanceError(f"missing required field {exc.args[0]!r}") from None
    if not isinstance(rooms_raw, list) or not isinstance(agents_raw, list):
        raise InstanceError("'rooms' and 'agents' must be lists")

    try:
        rent = to_fraction(rent_raw)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InstanceError(f"totalRent: {exc}") from None

    rooms = []
    for j, r in enumerate(rooms_raw):
        if not isinstance(r, Mapping) or "name" not in r:
            raise InstanceError(f"room {j} must be an object with a 'name'")
        rooms.append(RoomSpec(str(r["name"]), r.get("capacity", 1)))
    capacities = [r.capacity for r in rooms]

    agents = []
    for i, a in enumerate(agents_raw):
        if not isinstance(a, Mapping) or "name" not in a or "oracle" not in a:
            raise InstanceError(f"agent {i} must be an object with 'name' and 'oracle'")
        try:
            oracle = oracle_from_dict(a["oracle"])
        except (TypeError, ValueError, KeyError, ZeroDivisionError) as exc:
            raise InstanceError(f"agent {i} ({a['name']}): bad oracle: {exc}") from None
        if oracle.n_rooms is not None and oracle.n_rooms != len(rooms):
            raise InstanceError(
                f"agent {i} ({a['name']}): oracle describes {oracle.n_rooms} rooms, instance has {len(rooms)}"
            )
        agents.append(AgentSpec(str(a["name"]), oracle))

    check_counts(mode, len(agents), capacities)
    for kind, names in (("room", [r.name for r in rooms]), ("agent", [a.name for a in agents])):
        if len(set(names)) != len(names):
            dup = next(x for x in names if names.count(x) > 1)
            raise InstanceError(f"duplicate {kind} name {dup!r}")

    if raw.get("compensationBound") is not None:
        try:
            bound = to_fraction(raw["compensationBound"])
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"compensationBound: {exc}") from None
        given = True
    elif all(isinstance(a.oracle, QuasilinearOracle) for a in agents):
        bound = quasilinear_bound([a.oracle for a in agents], rent)
        given = False
    else:
        raise InstanceError("compensationBound is required unless every oracle is quasilinear")
    if bound < rent:
        raise InstanceError(f"compensationBound {bound} < totalRent {rent}; the bound must satisfy T ≥ R")

    return Instance(mode, tuple(agents), tuple(rooms), rent, bound, given)


@dataclass(frozen=True)
class Certificate:
    """Result of re-checking an allocation against every agent's oracle."""

    envy_free: bool
    max_regret: Fraction | float | None  # None when some oracle is ordinal
    epsilon: Fraction
    regrets: tuple[Fraction | float | None, ...] = ()
    violations: tuple[str, ...] = ()
    scenarios: Mapping[int, "Certificate"] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.envy_free and not self.violations


@dataclass(frozen=True)
class Allocation:
    """Rooms mapped to the agents living there, plus room prices."""

    assignment: Mapping[int, tuple[int, ...]]
    prices: PriceVector

    def room_of(self) -> dict[int, int]:
        return {i: j for j, agents in self.assignment.items() for i in agents}
