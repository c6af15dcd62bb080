"""Exact bipartite transport: max-flow for Hall-type conditions, min-cost for Kantorovich."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping

from .core import ONE, ZERO, PseudoMetric, SubDistribution, to_fraction


@dataclass(frozen=True)
class TransportProblem:
    left: Mapping[Hashable, Fraction]
    right: Mapping[Hashable, Fraction]
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        left = {k: to_fraction(v) for k, v in self.left.items() if v}
        right = {k: to_fraction(v) for k, v in self.right.items() if v}
        if any(v < 0 for v in left.values()) or any(v < 0 for v in right.values()):
            raise ValueError("supplies and capacities must be nonnegative")
        # Edges touching a zero-weight node can never carry flow.
        edges = frozenset((x, y) for x, y in self.edges if x in left and y in right)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "edges", edges)


@dataclass(frozen=True)
class FlowResult:
    value: Fraction
    assignment: Mapping[tuple, Fraction]


_SOURCE, _SINK = ("src",), ("snk",)


def max_transport(problem: TransportProblem) -> FlowResult:
    """Maximum mass routable from ``left`` supplies to ``right`` capacities.

    Edmonds-Karp (BFS augmenting paths) on the network
    source -> left -> right -> sink. The number of augmentations is bounded
    by the graph size, so exact rationals are fine.
    """
    left, right = problem.left, problem.right
    L = {x: ("L", x) for x in left}
    R = {y: ("R", y) for y in right}
    cap: dict = {_SOURCE: {}, _SINK: {}}
    for node in (*L.values(), *R.values()):
        cap[node] = {}

    def add(u, v, c):
        cap[u][v] = cap[u].get(v, ZERO) + c
        cap[v].setdefault(u, ZERO)

    for x, s in left.items():
        add(_SOURCE, L[x], s)
    for y, c in right.items():
        add(R[y], _SINK, c)
    for x, y in sorted(problem.edges, key=repr):
        # An edge never needs more than the supply at its tail.
        add(L[x], R[y], left[x])

    value = ZERO
    while True:
        parent = {_SOURCE: None}
        queue = deque([_SOURCE])
        while queue and _SINK not in parent:
            u = queue.popleft()
            for v, c in cap[u].items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if _SINK not in parent:
            break
        path = []
        v = _SINK
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        bottleneck = min(cap[u][v] for u, v in path)
        for u, v in path:
            cap[u][v] -= bottleneck
            cap[v][u] += bottleneck
        value += bottleneck

    assignment = {}
    for x, y in problem.edges:
        flow = cap[R[y]][L[x]]
        if flow > 0:
            assignment[(x, y)] = flow
    return FlowResult(value, assignment)


def hall_feasible(mu: SubDistribution, nu: SubDistribution, edges: Iterable[tuple], eps) -> bool:
    """Whether ``mu(X) <= nu(E(X)) + eps`` for every set ``X``.

    By max-flow/min-cut this is ``maxflow >= mass(mu) - eps``.
    """
    eps = to_fraction(eps)
    mass = mu.mass
    if mass <= eps:
        return True
    result = max_transport(TransportProblem(dict(mu.items()), dict(nu.items()), frozenset(edges)))
    return result.value >= mass - eps


class _Bottom:
    """Padding sink for subdistributions, at distance 1 from everything else."""

    def __repr__(self):
        return "BOTTOM"


BOTTOM = _Bottom()


def _min_cost_flow(supply: Mapping, demand: Mapping, cost: Callable[[object, object], Fraction]):
    """Successive shortest paths on a complete bipartite graph with equal totals.

    Shortest paths come from Bellman-Ford on the residual graph, which stays
    free of negative cycles under this scheme. Returns (cost, plan).
    """
    lefts = [("L", x) for x in supply]
    rights = [("R", y) for y in demand]
    res: dict = {node: {} for node in (_SOURCE, _SINK, *lefts, *rights)}
    arc_cost: dict = {}

    def add(u, v, c, w):
        res[u][v] = res[u].get(v, ZERO) + c
        res[v].setdefault(u, ZERO)
        arc_cost[(u, v)] = w
        arc_cost[(v, u)] = -w

    for node in lefts:
        add(_SOURCE, node, supply[node[1]], ZERO)
    for node in rights:
        add(node, _SINK, demand[node[1]], ZERO)
    for ln in lefts:
        for rn in rights:
            add(ln, rn, supply[ln[1]], cost(ln[1], rn[1]))

    nodes = list(res)
    total_cost = ZERO
    while True:
        dist = {_SOURCE: ZERO}
        parent = {_SOURCE: None}
        for _ in range(len(nodes) - 1):
            changed = False
            for u in nodes:
                if u not in dist:
                    continue
                du = dist[u]
                for v, c in res[u].items():
                    if c > 0:
                        nd = du + arc_cost[(u, v)]
                        if v not in dist or nd < dist[v]:
                            dist[v] = nd
                            parent[v] = u
                            changed = True
            if not changed:
                break
        if _SINK not in dist:
            break
        path = []
        v = _SINK
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(res[u][v] for u, v in path)
        for u, v in path:
            res[u][v] -= push
            res[v][u] += push
        total_cost += push * dist[_SINK]

    plan = {}
    for ln in lefts:
        for rn in rights:
            f = res[rn][ln]
            if f > 0:
                plan[(ln[1], rn[1])] = f
    return total_cost, plan


def min_cost_transport(mu: SubDistribution, nu: SubDistribution, d: PseudoMetric) -> Fraction:
    """Optimal transport cost between subdistributions under ground metric ``d``.

    Each side is padded with ``BOTTOM`` carrying its missing mass so both
    total 1; ``BOTTOM`` is at distance 1 from every state and 0 from itself.
    """
    supply = dict(mu.items())
    demand = dict(nu.items())
    if mu.mass < 1:
        supply[BOTTOM] = ONE - mu.mass
    if nu.mass < 1:
        demand[BOTTOM] = ONE - nu.mass

    def cost(x, y):
        if x is BOTTOM or y is BOTTOM:
            return ZERO if x is y else ONE
        return d(x, y)

    value, _ = _min_cost_flow(supply, demand, cost)
    return value
