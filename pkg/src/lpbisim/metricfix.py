"""Behavioural distances on an LMP: the eps-distance, LP and Kantorovich iteration."""

from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .bisim import bisimilarity, greatest_eps_bisimulation
from .core import LMP, ONE, ZERO, PseudoMetric, Relation, SubDistribution, to_fraction
from .flow import min_cost_transport
from .lpmetric import apply_delta_lp

DEFAULT_TOL = Fraction(1, 2 ** 30)


@dataclass(frozen=True)
class DistanceBracket:
    lower: Fraction
    upper: Fraction

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def __contains__(self, value) -> bool:
        return self.lower <= to_fraction(value) <= self.upper


@dataclass(frozen=True)
class FixpointReport:
    metric: PseudoMetric
    iterations: int
    residual: Fraction
    converged: bool
    history: tuple[PseudoMetric, ...] = ()


class BisimulationCache:
    """Greatest eps-bisimulations keyed by exact eps.

    Relations shrink as eps decreases, so a new probe starts refinement from
    the cached relation at the nearest larger eps.
    """

    def __init__(self, m: LMP):
        self.m = m
        self._keys: list[Fraction] = []
        self._rels: dict[Fraction, Relation] = {}
        self._lock = threading.Lock()

    def __call__(self, eps) -> Relation:
        eps = to_fraction(eps)
        with self._lock:
            rel = self._rels.get(eps)
            if rel is not None:
                return rel
            i = bisect.bisect_right(self._keys, eps)
            start = self._rels[self._keys[i]] if i < len(self._keys) else None
        rel = greatest_eps_bisimulation(self.m, eps, start=start)
        with self._lock:
            if eps not in self._rels:
                bisect.insort(self._keys, eps)
                self._rels[eps] = rel
        return rel

    def __len__(self) -> int:
        return len(self._rels)


def dstar_pair(m: LMP, s: int, t: int, tol=DEFAULT_TOL, cache: BisimulationCache | None = None) -> DistanceBracket:
    """Bracket the eps-distance between ``s`` and ``t`` by bisection on dyadic probes."""
    tol = to_fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if s == t:
        return DistanceBracket(ZERO, ZERO)
    cache = cache or BisimulationCache(m)
    if (s, t) in cache(ZERO):
        return DistanceBracket(ZERO, ZERO)
    lo, hi = ZERO, ONE
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if (s, t) in cache(mid):
            hi = mid
        else:
            lo = mid
    return DistanceBracket(lo, hi)


def dstar_brackets(m: LMP, tol=DEFAULT_TOL, cache: BisimulationCache | None = None) -> dict[tuple[int, int], DistanceBracket]:
    """Brackets for every unordered pair ``i < j``."""
    cache = cache or BisimulationCache(m)
    n = m.n_states
    return {(i, j): dstar_pair(m, i, j, tol, cache) for i in range(n) for j in range(i + 1, n)}


def dstar_matrix(m: LMP, tol=DEFAULT_TOL, cache: BisimulationCache | None = None) -> PseudoMetric:
    """Upper bracket endpoints as a metric; bisimilar pairs are exactly 0."""
    brackets = dstar_brackets(m, tol, cache)
    return PseudoMetric.from_function(m.n_states, lambda i, j: brackets[(i, j)].upper, m.states)


def _iterate(step: Callable[[PseudoMetric], PseudoMetric], d0: PseudoMetric, cap: int, tol,
             keep_history: bool) -> FixpointReport:
    tol = to_fraction(tol)
    if cap < 1:
        raise ValueError("cap must be at least 1")
    current = d0
    history = []
    residual = ZERO
    iterations = 0
    for iterations in range(1, cap + 1):
        nxt = step(current)
        residual = nxt.max_abs_diff(current)
        current = nxt
        if keep_history:
            history.append(current)
        if residual <= tol:
            break
    return FixpointReport(current, iterations, residual, residual <= tol, tuple(history))


def iterate_delta_lp(m: LMP, d0: PseudoMetric | None = None, cap: int = 100, tol=ZERO,
                     keep_history: bool = False) -> FixpointReport:
    """Iterate the LP functional from ``d0`` (default: the zero metric)."""
    d0 = d0 if d0 is not None else PseudoMetric.zero(m.n_states, m.states)
    return _iterate(lambda d: apply_delta_lp(m, d), d0, cap, tol, keep_history)


def check_fixpoint_lp(m: LMP, d: PseudoMetric) -> Fraction:
    """Largest pointwise gap between ``d`` and its LP image; 0 for an exact fixpoint."""
    return apply_delta_lp(m, d).max_abs_diff(d)


def bisim_distance_metric(m: LMP) -> PseudoMetric:
    """0 on bisimilar pairs, 1 elsewhere."""
    rel = bisimilarity(m)
    return PseudoMetric.from_function(m.n_states, lambda i, j: ZERO if (i, j) in rel else ONE, m.states)


def eps_ball_relation(d: PseudoMetric, eps) -> Relation:
    """``{(s, t) | d(s, t) < eps}``."""
    eps = to_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return Relation(((i, j) for i in range(d.n) for j in range(d.n) if d(i, j) < eps), symmetric=True)


def kantorovich_distance(mu: SubDistribution, nu: SubDistribution, d: PseudoMetric) -> Fraction:
    return min_cost_transport(mu, nu, d)


def apply_delta_k(m: LMP, d: PseudoMetric) -> PseudoMetric:
    def entry(i, j):
        return max((kantorovich_distance(m.tau(i, a), m.tau(j, a), d) for a in range(m.n_actions)),
                   default=ZERO)
    return PseudoMetric.from_function(m.n_states, entry, m.states)


def iterate_delta_k(m: LMP, d0: PseudoMetric | None = None, cap: int = 100, tol=ZERO,
                    keep_history: bool = False) -> FixpointReport:
    """Iterate the undiscounted Kantorovich functional.

    It typically only converges in the limit; ``converged`` is False when
    the cap is hit first.
    """
    d0 = d0 if d0 is not None else PseudoMetric.zero(m.n_states, m.states)
    return _iterate(lambda d: apply_delta_k(m, d), d0, cap, tol, keep_history)


@dataclass(frozen=True)
class CompareRow:
    s: str
    t: str
    dstar: DistanceBracket
    dk_iterate: Fraction


def compare_table(m: LMP, tol=DEFAULT_TOL, iters: int = 100) -> list[CompareRow]:
    brackets = dstar_brackets(m, tol)
    dk = iterate_delta_k(m, cap=iters).metric
    n = m.n_states
    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            s, t = sorted((m.states[i], m.states[j]))
            rows.append(CompareRow(s, t, brackets[(i, j)], dk(i, j)))
    return sorted(rows, key=lambda r: (r.s, r.t))
