"""Levy-Prokhorov lifting of a state pseudometric to subdistributions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .core import LMP, ONE, ZERO, PseudoMetric, SubDistribution, to_fraction
from .flow import TransportProblem, hall_feasible, max_transport

BRUTEFORCE_SUPPORT_LIMIT = 24


def ball(xs: Iterable[int], d: PseudoMetric, eps) -> set[int]:
    """Open ball ``{y | exists x in xs: d(x, y) < eps}``."""
    eps = to_fraction(eps)
    xs = list(xs)
    return {y for y in range(d.n) if any(d(x, y) < eps for x in xs)}


def _edges_below(mu, nu, d, eps):
    return frozenset((x, y) for x in mu for y in nu if d(x, y) < eps)


def _edges_at_most(mu, nu, d, bound):
    return frozenset((x, y) for x in mu for y in nu if d(x, y) <= bound)


def lp_feasible(mu: SubDistribution, nu: SubDistribution, d: PseudoMetric, eps) -> bool:
    """Whether ``eps`` satisfies both LP inequalities for every set of states."""
    eps = to_fraction(eps)
    edges = _edges_below(mu, nu, d, eps)
    return (hall_feasible(mu, nu, edges, eps)
            and hall_feasible(nu, mu, frozenset((y, x) for x, y in edges), eps))


def _subsets(items):
    items = sorted(items)
    return itertools.chain.from_iterable(itertools.combinations(items, r) for r in range(len(items) + 1))


def lp_feasible_bruteforce(mu: SubDistribution, nu: SubDistribution, d: PseudoMetric, eps) -> bool:
    """Direct check of the LP inequalities over every subset of each support."""
    if len(mu) + len(nu) > BRUTEFORCE_SUPPORT_LIMIT:
        raise ValueError(f"supports too large for enumeration ({len(mu)} + {len(nu)})")
    eps = to_fraction(eps)
    for a, b in ((mu, nu), (nu, mu)):
        for xs in _subsets(a.support):
            if a.measure(xs) > b.measure(ball(xs, d, eps)) + eps:
                return False
    return True


def _deficiency(mu, nu, edges) -> Fraction:
    """``mass(mu) - maxflow``: the largest ``mu(X) - nu(E(X))``."""
    if not len(mu):
        return ZERO
    flow = max_transport(TransportProblem(dict(mu.items()), dict(nu.items()), edges)).value
    return mu.mass - flow


@dataclass(frozen=True)
class LpBreakpointAnalysis:
    """Per-interval data behind an exact LP distance.

    ``breakpoints[k]`` is the k-th distinct distance between the supports
    (``breakpoints[0] == 0``); on ``(d_k, d_{k+1}]`` the open-ball edge set is
    ``{d <= d_k}`` and ``thresholds[k]`` is the smallest slack it needs.
    """

    breakpoints: tuple[Fraction, ...]
    thresholds: tuple[Fraction, ...]
    chosen: int
    value: Fraction

    def contribution(self, k: int) -> Fraction | None:
        """Infimum of the feasible probes inside interval ``k``, or None if there are none."""
        return _contribution(self.breakpoints, self.thresholds, k)


def _contribution(bps, fs, k):
    lo = bps[k]
    hi = bps[k + 1] if k + 1 < len(bps) else ONE
    f = fs[k]
    if f <= lo:
        return lo
    if f <= hi:
        return f
    return None


def _analyse(pairs: Sequence[tuple[SubDistribution, SubDistribution]], d: PseudoMetric) -> LpBreakpointAnalysis:
    values = {ZERO}
    for mu, nu in pairs:
        values.update(d(x, y) for x in mu for y in nu)
    # A breakpoint at 1 adds nothing: (1, 1] is empty and eps = 1 is always feasible.
    bps = tuple(sorted(v for v in values if v < ONE or v == ZERO))
    fs = []
    best, chosen = None, -1
    for k, bound in enumerate(bps):
        f = ZERO
        for mu, nu in pairs:
            edges = _edges_at_most(mu, nu, d, bound)
            f = max(f, _deficiency(mu, nu, edges),
                    _deficiency(nu, mu, frozenset((y, x) for x, y in edges)))
        fs.append(f)
        c = _contribution(bps, fs, k)
        if c is not None and (best is None or c < best):
            best, chosen = c, k
    return LpBreakpointAnalysis(bps, tuple(fs), chosen, best)


def lp_breakpoint_analysis(mu: SubDistribution, nu: SubDistribution, d: PseudoMetric) -> LpBreakpointAnalysis:
    return _analyse([(mu, nu)], d)


def lp_distance(mu: SubDistribution, nu: SubDistribution, d: PseudoMetric) -> Fraction:
    """Exact LP distance: the infimum of feasible slacks, attained or not."""
    return _analyse([(mu, nu)], d).value


def apply_delta_lp(m: LMP, d: PseudoMetric) -> PseudoMetric:
    """One application of the LP functional: per pair, the max over actions."""
    def entry(i, j):
        return max((lp_distance(m.tau(i, a), m.tau(j, a), d) for a in range(m.n_actions)), default=ZERO)
    return PseudoMetric.from_function(m.n_states, entry, m.states)


def delta_lp_joint_infimum(m: LMP, s0: int, s1: int, d: PseudoMetric) -> Fraction:
    """Same entry as :func:`apply_delta_lp`, with the action quantifier inside the infimum."""
    pairs = [(m.tau(s0, a), m.tau(s1, a)) for a in range(m.n_actions)]
    return _analyse(pairs, d).value


def hom_sup_distance(f1: Mapping | Callable, f2: Mapping | Callable, d_y: PseudoMetric,
                     domain: Iterable | None = None) -> Fraction:
    """Sup distance between two maps into the space of ``d_y``."""
    g1 = f1.__getitem__ if isinstance(f1, Mapping) else f1
    g2 = f2.__getitem__ if isinstance(f2, Mapping) else f2
    if domain is None:
        if not isinstance(f1, Mapping):
            raise ValueError("domain is required for callable maps")
        domain = f1.keys()
    return max((d_y(g1(x), g2(x)) for x in domain), default=ZERO)
