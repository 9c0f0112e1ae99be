"""
Exact combinatorics on bipartite agent-room graphs.

Everything is decided by a small augmenting-path max flow. Rational capacities
are scaled to integers by the common denominator, so flows stay exact and
cheap. Ties are broken towards the lowest index.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True)
class DemandGraph:
    n_agents: int
    n_rooms: int
    edges: tuple[tuple[int, int], ...]
    weights: Mapping[tuple[int, int], Fraction] | None = None

    def __post_init__(self):
        for i, j in self.edges:
            if not (0 <= i < self.n_agents and 0 <= j < self.n_rooms):
                raise ValueError(f"edge {(i, j)} out of range")

    @classmethod
    def build(cls, n_agents: int, n_rooms: int, edges: Iterable[tuple[int, int]]) -> "DemandGraph":
        return cls(n_agents, n_rooms, tuple(sorted(set(edges))))

    def neighbours(self, agent: int) -> list[int]:
        return [j for i, j in self.edges if i == agent]

    def room_neighbours(self, room: int) -> list[int]:
        return [i for i, j in self.edges if j == room]

    def without_room(self, room: int) -> "DemandGraph":
        """Drop a room and renumber the rooms after it."""
        kept = [(i, j if j < room else j - 1) for i, j in self.edges if j != room]
        return DemandGraph(self.n_agents, self.n_rooms - 1, tuple(kept))

    def without_agent(self, agent: int) -> "DemandGraph":
        kept = [(i if i < agent else i - 1, j) for i, j in self.edges if i != agent]
        return DemandGraph(self.n_agents - 1, self.n_rooms, tuple(kept))


def marginals(graph: DemandGraph, weights: Mapping[tuple[int, int], Fraction]):
    """Row sums over agents and column sums over rooms of an edge weighting."""
    b = [Fraction(0)] * graph.n_agents
    a = [Fraction(0)] * graph.n_rooms
    for (i, j), w in weights.items():
        if (i, j) not in graph.edges:
            raise ValueError(f"weight on non-edge {(i, j)}")
        b[i] += w
        a[j] += w
    return tuple(b), tuple(a)


class _Flow:
    """Edmonds-Karp on a dense residual matrix; nodes are small integers."""

    def __init__(self, size: int):
        self.size = size
        self.cap = [[0] * size for _ in range(size)]
        self.adj: list[list[int]] = [[] for _ in range(size)]

    def add(self, u: int, v: int, c) -> None:
        if v not in self.adj[u]:
            self.adj[u].append(v)
            self.adj[v].append(u)
        self.cap[u][v] += c

    def run(self, s: int, t: int):
        for nbrs in self.adj:
            nbrs.sort()
        self.flow = [[0] * self.size for _ in range(self.size)]
        total = 0
        while True:
            parent = [-1] * self.size
            parent[s] = s
            queue = deque([s])
            while queue and parent[t] < 0:
                u = queue.popleft()
                for v in self.adj[u]:
                    if parent[v] < 0 and self.cap[u][v] - self.flow[u][v] > 0:
                        parent[v] = u
                        queue.append(v)
            if parent[t] < 0:
                return total
            push = None
            v = t
            while v != s:
                u = parent[v]
                room = self.cap[u][v] - self.flow[u][v]
                push = room if push is None else min(push, room)
                v = u
            v = t
            while v != s:
                u = parent[v]
                self.flow[u][v] += push
                self.flow[v][u] -= push
                v = u
            total += push

    def reachable(self, s: int) -> set[int]:
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                if v not in seen and self.cap[u][v] - self.flow[u][v] > 0:
                    seen.add(v)
                    queue.append(v)
        return seen


def _scale(values: Sequence[Fraction]) -> int:
    return math.lcm(*(Fraction(v).denominator for v in values))


def _bipartite_flow(graph: DemandGraph, agent_cap: Sequence, room_cap: Sequence, middle):
    n, m = graph.n_agents, graph.n_rooms
    source, sink = n + m, n + m + 1
    net = _Flow(n + m + 2)
    for i in range(n):
        net.add(source, i, agent_cap[i])
    for i, j in graph.edges:
        net.add(i, n + j, middle)
    for j in range(m):
        net.add(n + j, sink, room_cap[j])
    value = net.run(source, sink)
    return net, value


def transportation_feasible(
    graph: DemandGraph, agent_marginal: Sequence, room_marginal: Sequence
) -> dict[tuple[int, int], Fraction] | None:
    """Nonnegative edge weights with the given row and column sums, or None.

    >>> g = DemandGraph.build(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)])
    >>> w = transportation_feasible(g, ["1/10", "1/2", "2/5"], ["3/10", "7/10"])
    >>> marginals(g, w) == ((Fraction(1, 10), Fraction(1, 2), Fraction(2, 5)), (Fraction(3, 10), Fraction(7, 10)))
    True
    """
    b0 = [Fraction(x) for x in agent_marginal]
    a0 = [Fraction(x) for x in room_marginal]
    if len(b0) != graph.n_agents or len(a0) != graph.n_rooms:
        raise ValueError("marginal lengths do not match the graph")
    if any(x < 0 for x in b0 + a0):
        raise ValueError("marginals must be nonnegative")
    if sum(b0) != sum(a0):
        raise ValueError(f"marginal sums differ: {sum(b0)} vs {sum(a0)}")
    # a room with positive demand and no edge can never be served
    covered = {j for _, j in graph.edges}
    if any(a0[j] > 0 and j not in covered for j in range(graph.n_rooms)):
        return None
    scale = _scale(b0 + a0)
    total = int(sum(b0) * scale)
    net, value = _bipartite_flow(
        graph, [int(x * scale) for x in b0], [int(x * scale) for x in a0], total
    )
    if value != total:
        return None
    n = graph.n_agents
    return {(i, j): Fraction(net.flow[i][n + j], scale) for i, j in graph.edges}


def max_matching(graph: DemandGraph) -> dict[int, int]:
    """Maximum matching as agent -> room, via augmenting paths in index order."""
    adj = [graph.neighbours(i) for i in range(graph.n_agents)]
    owner: dict[int, int] = {}

    def augment(i: int, seen: set[int]) -> bool:
        # a free room beats displacing an earlier agent
        for j in adj[i]:
            if j not in owner:
                owner[j] = i
                return True
        for j in adj[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in owner or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    for i in range(graph.n_agents):
        augment(i, set())
    return {i: j for j, i in sorted(owner.items(), key=lambda kv: kv[1])}


def hall_violation(
    graph: DemandGraph, room_capacity: Sequence[int] | None = None, side: str = "agents"
) -> frozenset[int] | None:
    """A subset of one side whose neighbourhood cannot meet its demand, or None.

    side="agents": each agent needs one seat; room j offers room_capacity[j]
    (default 1). Returns agents S with |S| > capacity(N(S)).
    side="rooms": room j needs room_capacity[j] distinct agents. Returns rooms
    S with demand(S) > |N(S)|.
    """
    n, m = graph.n_agents, graph.n_rooms
    caps = list(room_capacity) if room_capacity is not None else [1] * m
    if len(caps) != m:
        raise ValueError("one capacity per room")
    if side == "agents":
        net, value = _bipartite_flow(graph, [1] * n, caps, n)
        if value == n:
            return None
        reach = net.reachable(n + m)
        return frozenset(i for i in range(n) if i in reach)
    if side == "rooms":
        flipped = DemandGraph.build(m, n, [(j, i) for i, j in graph.edges])
        need = sum(caps)
        net, value = _bipartite_flow(flipped, caps, [1] * n, need)
        if value == need:
            return None
        reach = net.reachable(m + n)
        return frozenset(j for j in range(m) if j in reach)
    raise ValueError(f"side must be 'agents' or 'rooms', not {side!r}")


class MatchingInfeasible(Exception):
    def __init__(self, message: str, witness: frozenset[int], side: str):
        super().__init__(message)
        self.witness = witness
        self.side = side


def capacity_matching(graph: DemandGraph, capacities: Sequence[int]) -> dict[int, tuple[int, ...]]:
    """Assign every agent to a neighbouring room, filling room j with exactly c_j agents.

    Raises MatchingInfeasible carrying a set of agents whose neighbourhood is
    too small.
    """
    n, m = graph.n_agents, graph.n_rooms
    if len(capacities) != m or sum(capacities) != n:
        raise ValueError(f"capacities {list(capacities)} must sum to the agent count {n}")
    net, value = _bipartite_flow(graph, [1] * n, list(capacities), n)
    if value != n:
        reach = net.reachable(n + m)
        witness = frozenset(i for i in range(n) if i in reach)
        raise MatchingInfeasible(
            f"agents {sorted(witness)} have too few seats among their best rooms", witness, "agents"
        )
    return {j: tuple(i for i in range(n) if net.flow[i][n + j] > 0) for j in range(m)}
