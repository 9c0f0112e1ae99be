"""
Simplicial solver for compensable tenants.

Every agent labels every grid vertex with one of its best rooms at the
prices p_j = T - (T m - R) x_j. A zero coordinate means the room costs T, so
a compensable agent always has an admissible label with x_j > 0 there. The
solver scans Kuhn cells for one whose agent-label graph carries edge weights
with the mode's target marginals, refines around it, and finally reads an
allocation off the epsilon-best-room graph at the cell centroid.

Modes and marginals (agents b0, rooms a0):

    classic    1/n       1/n
    roommates  1/n       c_j/n
    secretive  1/(n-1)   1/n      (n rooms, n-1 present agents)
    extra      1/(n+1)   1/n      (n rooms, n+1 agents)
"""

from __future__ import annotations

import itertools
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from rental_harmony.domain import Certificate, Instance
from rental_harmony.matching import (
    DemandGraph,
    MatchingInfeasible,
    capacity_matching,
    max_matching,
    transportation_feasible,
)
from rental_harmony.mesh import Cell, PriceMap, barycentric, cells, cells_near, covers_everything

logger = logging.getLogger(__name__)


class AssumptionViolation(RuntimeError):
    """An agent has no admissible label: its oracle is not compensable."""

    def __init__(self, message: str, agent: int | None = None, prices: tuple | None = None):
        super().__init__(message)
        self.agent = agent
        self.prices = prices


class NoFeasibleCell(AssumptionViolation):
    """A complete scan found no cell with the target marginals."""


class MaxRoundsExceeded(RuntimeError):
    def __init__(self, message: str, diagnostics: "Diagnostics"):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SolverConfig:
    k0: int = 4
    growth: int = 2
    tol_price: Fraction | None = None  # default: T, i.e. try extraction from the first round
    epsilon: Fraction | None = None  # default: 1e-6 * max(|R|, T)
    max_rounds: int = 12
    radius: int = 2
    workers: int = 1

    def __post_init__(self):
        if self.k0 < 1:
            raise ValueError("k0 must be at least 1")
        if self.growth < 2:
            raise ValueError("growth must be an integer >= 2")
        if self.max_rounds < 1 or self.radius < 0 or self.workers < 1:
            raise ValueError("max_rounds and workers must be positive, radius nonnegative")
        if self.tol_price is not None and self.tol_price <= 0:
            raise ValueError("tol_price must be positive")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def resolved_epsilon(self, instance: Instance) -> Fraction:
        if self.epsilon is not None:
            return Fraction(self.epsilon)
        return Fraction(1, 10**6) * max(abs(instance.total_rent), instance.compensation_bound)

    def resolved_tol_price(self, instance: Instance) -> Fraction:
        if self.tol_price is not None:
            return Fraction(self.tol_price)
        return instance.compensation_bound


@dataclass
class Diagnostics:
    rounds: int = 0
    final_k: int = 0
    cells_scanned: int = 0
    oracle_calls: int = 0
    boundary_labels: int = 0
    fallbacks: int = 0
    diameters: list = field(default_factory=list)
    wall_time_ms: float = 0.0
    solver: str = "mesh"


@dataclass
class Solution:
    mode: str
    prices: tuple
    assignment: Mapping[int, tuple[int, ...]] | None = None  # room -> agents
    scenarios: Mapping[int, Mapping[int, int]] | None = None  # pick/leaver -> {agent: room}
    certificate: Certificate | None = None
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    cell: Cell | None = None
    weights: Mapping[tuple[int, int], Fraction] | None = None


def mode_marginals(mode: str, n_agents: int, capacities: Sequence[int]) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    m = len(capacities)
    agents = tuple([Fraction(1, n_agents)] * n_agents)
    if mode == "roommates":
        return agents, tuple(Fraction(c, n_agents) for c in capacities)
    if mode in ("classic", "secretive", "extra"):
        return agents, tuple([Fraction(1, m)] * m)
    raise ValueError(f"unknown mode {mode!r}")


def shift_to_sum(prices: Sequence, rent) -> tuple[Fraction, ...]:
    """Add the same amount to every price so that they sum to `rent`.

    >>> shift_to_sum([2, 2], 100)
    (Fraction(50, 1), Fraction(50, 1))
    """
    if any(p == math.inf for p in prices):
        raise ValueError("cannot shift a price vector with infinite entries")
    p = [Fraction(x) for x in prices]
    delta = (Fraction(rent) - sum(p)) / len(p)
    return tuple(x + delta for x in p)


def epsilon_graph(instance: Instance, prices: Sequence, epsilon) -> DemandGraph:
    """Agent i is joined to room j iff j is within epsilon of i's best utility.

    Ordinal oracles contribute their exact best rooms.
    """
    edges = []
    for i, oracle in enumerate(instance.oracles):
        if oracle.cardinal:
            utils = oracle.utilities(prices)
            top = max(utils)
            edges += [(i, j) for j, u in enumerate(utils) if u >= top - epsilon]
        else:
            edges += [(i, j) for j in oracle.best_rooms(prices)]
    return DemandGraph.build(instance.n_agents, instance.n_rooms, edges)


def extract(instance: Instance, graph: DemandGraph):
    """Read the mode's allocation off a best-room graph, or return None.

    classic/roommates give ``room -> agents``; secretive gives, for each room
    the newcomer might pick, an ``agent -> room`` matching of the rest;
    extra gives one such matching per leaving agent.
    """
    mode, n, m = instance.mode, instance.n_agents, instance.n_rooms
    if mode == "classic":
        match = max_matching(graph)
        if len(match) < n:
            return None
        return {j: tuple(i for i in range(n) if match.get(i) == j) for j in range(m)}
    if mode == "roommates":
        try:
            return capacity_matching(graph, instance.capacities)
        except MatchingInfeasible:
            return None
    scenarios = {}
    if mode == "secretive":
        for r in range(m):
            match = max_matching(graph.without_room(r))
            if len(match) < n:
                return None
            scenarios[r] = {i: (j if j < r else j + 1) for i, j in match.items()}
        return scenarios
    if mode == "extra":
        for leaver in range(n):
            match = max_matching(graph.without_agent(leaver))
            if len(match) < m:
                return None
            scenarios[leaver] = {(i if i < leaver else i + 1): j for i, j in match.items()}
        return scenarios
    raise ValueError(f"unknown mode {mode!r}")


class MeshSolver:
    """Labels, cell scans and the refinement loop for one instance."""

    def __init__(self, instance: Instance, config: SolverConfig | None = None):
        self.instance = instance
        self.config = config or SolverConfig()
        m, bound, rent = instance.n_rooms, instance.compensation_bound, instance.total_rent
        if m > 1 and bound * m <= rent:
            raise ValueError(f"need T*m > R for a nondegenerate price map (T={bound}, m={m}, R={rent})")
        self.price_map = PriceMap("compensable", bound, rent)
        self.marginals = mode_marginals(instance.mode, instance.n_agents, instance.capacities)
        self.diagnostics = Diagnostics()
        # (k, y) -> tuple of labels, one per agent
        self.labels: dict[tuple[int, tuple[int, ...]], tuple[int, ...]] = {}
        self._lock = threading.Lock()

    # -- labels -------------------------------------------------------------

    def label_vertex(self, agent: int, y: tuple[int, ...], k: int) -> int:
        return self.vertex_labels(y, k)[agent]

    def vertex_labels(self, y: tuple[int, ...], k: int) -> tuple[int, ...]:
        key = (k, y)
        hit = self.labels.get(key)
        if hit is not None:
            return hit
        prices = self.price_map(barycentric(y, k))
        out = []
        for i, oracle in enumerate(self.instance.oracles):
            best = oracle.best_rooms(prices)
            admissible = [j for j in sorted(best) if y[j] > 0]
            if not admissible:
                name = self.instance.agents[i].name
                raise AssumptionViolation(
                    f"agent {i} ({name}) is not compensable: at prices {[str(p) for p in prices]} "
                    f"its best rooms {sorted(best)} all cost T={self.instance.compensation_bound}",
                    agent=i,
                    prices=prices,
                )
            out.append(admissible[0])
        labels = tuple(out)
        with self._lock:
            self.diagnostics.oracle_calls += len(out)
            if 0 in y:
                self.diagnostics.boundary_labels += len(out)
            self.labels[key] = labels
        return labels

    def cell_graph(self, cell: Cell) -> DemandGraph:
        edges = set()
        for y in cell.vertices:
            edges.update(enumerate(self.vertex_labels(y, cell.k)))
        return DemandGraph.build(self.instance.n_agents, self.instance.n_rooms, edges)

    # -- scanning -----------------------------------------------------------

    def _try(self, cell: Cell):
        w = transportation_feasible(self.cell_graph(cell), *self.marginals)
        return None if w is None else (cell, w)

    def _scan_chunk(self, chunk: list[Cell]):
        for idx, cell in enumerate(chunk):
            hit = self._try(cell)
            if hit is not None:
                return idx, hit
        return None

    def find_feasible_cell(self, k: int, region: Iterable[Cell] | None = None):
        """First cell (in iteration order) with feasible marginals, or None."""
        if region is not None:
            source = iter(region)
        elif self.instance.n_rooms == 1:
            source = iter([Cell(k, (), ())])
        else:
            source = cells(self.instance.n_rooms, k)
        workers = self.config.workers
        if workers == 1:
            for cell in source:
                self.diagnostics.cells_scanned += 1
                hit = self._try(cell)
                if hit is not None:
                    return hit
            return None
        chunk_size = 64
        with ThreadPoolExecutor(max_workers=workers) as pool:
            while True:
                batch = list(itertools.islice(source, chunk_size * workers))
                if not batch:
                    return None
                chunks = [batch[s:s + chunk_size] for s in range(0, len(batch), chunk_size)]
                results = list(pool.map(self._scan_chunk, chunks))
                for c, res in enumerate(results):
                    if res is not None:
                        idx, hit = res
                        self.diagnostics.cells_scanned += c * chunk_size + idx + 1
                        return hit
                self.diagnostics.cells_scanned += len(batch)

    def _search(self, k: int, previous: Cell | None):
        if previous is None:
            hit = self.find_feasible_cell(k)
            if hit is None:
                raise NoFeasibleCell(f"no cell at resolution {k} carries the target marginals")
            return hit
        growth, radius = self.config.growth, self.config.radius
        while True:
            hit = self.find_feasible_cell(k, cells_near(previous, growth, radius))
            if hit is not None:
                return hit
            if covers_everything(previous, growth, radius):
                raise NoFeasibleCell(f"no cell at resolution {k} carries the target marginals")
            self.diagnostics.fallbacks += 1
            radius = max(1, 2 * radius)
            logger.info("widening search to radius %d at k=%d", radius, k)

    # -- main loop ----------------------------------------------------------

    def _extract_near(self, cell: Cell, eps):
        """Try the centroid, then the cell's vertices; first extractable point wins."""
        points = [cell.centroid()] + cell.points()
        prices = None
        for x in points:
            prices = self.price_map(x)
            if any(p == math.inf for p in prices):
                continue
            payload = extract(self.instance, epsilon_graph(self.instance, prices, eps))
            if payload is not None:
                return prices, payload
        return self.price_map(points[0]), None

    def solve(self) -> Solution:
        start = time.perf_counter()
        inst, cfg, diag = self.instance, self.config, self.diagnostics
        eps = cfg.resolved_epsilon(inst)
        tol = cfg.resolved_tol_price(inst)
        spread = abs(inst.compensation_bound * inst.n_rooms - inst.total_rent)
        k, previous = cfg.k0, None
        for rnd in range(1, cfg.max_rounds + 1):
            diag.rounds, diag.final_k = rnd, k
            cell, weights = self._search(k, previous)
            diameter = spread / k
            diag.diameters.append(diameter)
            logger.debug("round %d: k=%d cell=%s diameter=%s", rnd, k, cell, diameter)
            if diameter <= tol:
                prices, payload = self._extract_near(cell, eps)
                if payload is not None:
                    solution = Solution(inst.mode, prices, diagnostics=diag, cell=cell, weights=weights)
                    if inst.mode in ("classic", "roommates"):
                        solution.assignment = payload
                    else:
                        solution.scenarios = payload
                    solution.certificate = verify(inst, solution, eps)
                    diag.wall_time_ms = (time.perf_counter() - start) * 1000
                    return solution
            previous = cell
            k *= cfg.growth
        diag.wall_time_ms = (time.perf_counter() - start) * 1000
        last = diag.diameters[-1] if diag.diameters else None
        hint = ""
        if last is not None and last > eps:
            hint = f"; final price diameter {float(last):.4g} exceeds epsilon {float(eps):.4g}, raise epsilon or rounds"
        raise MaxRoundsExceeded(
            f"no envy-free allocation extracted after {cfg.max_rounds} rounds (last k={diag.final_k}){hint}", diag
        )


def label_vertex(instance: Instance, agent: int, y: Sequence[int], k: int) -> int:
    return MeshSolver(instance).label_vertex(agent, tuple(y), k)


def cell_demand_graph(instance: Instance, cell: Cell) -> DemandGraph:
    return MeshSolver(instance).cell_graph(cell)


def find_feasible_cell(instance: Instance, k: int, region: Iterable[Cell] | None = None):
    return MeshSolver(instance).find_feasible_cell(k, region)


def solve(instance: Instance, config: SolverConfig | None = None) -> Solution:
    return MeshSolver(instance, config).solve()


# ---------------------------------------------------------------------------
# verification


def _regret(oracle, prices, room):
    if oracle.cardinal:
        utils = oracle.utilities(prices)
        return max(utils) - utils[room]
    return None


def _check_matching(instance, prices, match: Mapping[int, int], eps, agents, rooms, shared=False) -> Certificate:
    violations = []
    if sorted(match) != sorted(agents):
        violations.append(f"matching covers agents {sorted(match)}, expected {sorted(agents)}")
    used = list(match.values())
    if (not shared and len(set(used)) != len(used)) or not set(used) <= set(rooms):
        violations.append(f"matching uses rooms {used}, allowed {sorted(rooms)}")
    regrets, envy_free = [], True
    for i in agents:
        if i not in match:
            regrets.append(None)
            continue
        oracle = instance.oracles[i]
        r = _regret(oracle, prices, match[i])
        regrets.append(r)
        ok = r <= eps if r is not None else match[i] in oracle.best_rooms(prices)
        envy_free = envy_free and ok
    cardinal = all(r is not None for r in regrets)
    top = max(regrets, default=Fraction(0)) if cardinal else None
    return Certificate(envy_free, top, Fraction(eps), tuple(regrets), tuple(violations))


def verify(instance: Instance, solution: Solution, epsilon) -> Certificate:
    """Re-query every oracle at the solution prices. Independent of the mesh."""
    eps = Fraction(epsilon)
    prices = tuple(solution.prices)
    n, m = instance.n_agents, instance.n_rooms
    problems = []
    if len(prices) != m:
        return Certificate(False, None, eps, (), (f"{len(prices)} prices for {m} rooms",))
    total = sum(prices)
    if isinstance(total, Fraction):
        if total != instance.total_rent:
            problems.append(f"prices sum to {total}, rent is {instance.total_rent}")
    elif abs(total - float(instance.total_rent)) > 1e-9 * max(1.0, abs(float(instance.total_rent))):
        problems.append(f"prices sum to {total}, rent is {instance.total_rent}")

    if instance.mode in ("classic", "roommates"):
        assignment = solution.assignment or {}
        seen = [i for agents in assignment.values() for i in agents]
        if sorted(seen) != list(range(n)):
            problems.append("every agent must appear in exactly one room")
        for j in range(m):
            got = len(assignment.get(j, ()))
            if got != instance.capacities[j]:
                problems.append(f"room {j} holds {got} agents, capacity {instance.capacities[j]}")
        match = {i: j for j, agents in assignment.items() for i in agents if 0 <= j < m}
        cert = _check_matching(instance, prices, match, eps, range(n), range(m), shared=True)
        return Certificate(cert.envy_free, cert.max_regret, eps, cert.regrets, tuple(problems) + cert.violations)

    scenarios = solution.scenarios or {}
    keys = range(m) if instance.mode == "secretive" else range(n)
    per: dict[int, Certificate] = {}
    for key in keys:
        if key not in scenarios:
            per[key] = Certificate(False, None, eps, (), (f"missing scenario {key}",))
            continue
        if instance.mode == "secretive":
            per[key] = _check_matching(instance, prices, scenarios[key], eps, range(n), [j for j in range(m) if j != key])
        else:
            per[key] = _check_matching(instance, prices, scenarios[key], eps, [i for i in range(n) if i != key], range(m))
    envy_free = all(c.envy_free for c in per.values())
    violations = tuple(problems) + tuple(f"scenario {k}: {v}" for k, c in per.items() for v in c.violations)
    regs = [c.max_regret for c in per.values()]
    top = max(regs) if regs and all(r is not None for r in regs) else None
    # per agent, the worst regret over the scenarios it takes part in
    agent_regrets = []
    for i in range(n):
        vals = [c.regrets[idx] for k, c in per.items() for idx, a in enumerate(_agents_of(instance, k)) if a == i and idx < len(c.regrets)]
        agent_regrets.append(max(vals) if vals and all(v is not None for v in vals) else None)
    return Certificate(envy_free, top, eps, tuple(agent_regrets), violations, per)


def _agents_of(instance: Instance, key: int) -> list[int]:
    if instance.mode == "secretive":
        return list(range(instance.n_agents))
    return [i for i in range(instance.n_agents) if i != key]
