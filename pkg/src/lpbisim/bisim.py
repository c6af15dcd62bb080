"""Approximate simulations and bisimulations, and their coupling certificates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Mapping, Sequence

from .core import LMP, ZERO, Relation, SubDistribution, eps_order, sub_order, to_fraction
from .flow import TransportProblem, hall_feasible, max_transport

BRUTEFORCE_SUPPORT_LIMIT = 20
SUBSET_CHECK_LIMIT = 12


@dataclass(frozen=True)
class EpsCoupling:
    """Weight function ``beta`` on a relation, certifying an eps-coupling."""

    relation: Relation
    weights: Mapping[tuple[int, int], Fraction]
    epsilon: Fraction

    @property
    def total(self) -> Fraction:
        return sum(self.weights.values(), ZERO)

    def left_marginal(self) -> SubDistribution:
        out: dict = {}
        for (x, _), w in self.weights.items():
            out[x] = out.get(x, ZERO) + w
        return SubDistribution(out, check_mass=False)

    def right_marginal(self) -> SubDistribution:
        out: dict = {}
        for (_, y), w in self.weights.items():
            out[y] = out.get(y, ZERO) + w
        return SubDistribution(out, check_mass=False)


@dataclass(frozen=True)
class SpanWitness:
    """One eps-coupling per related pair and action."""

    relation: Relation
    epsilon: Fraction
    b: Mapping[tuple[int, int, int], EpsCoupling]


def _edges(rel: Relation, mu: SubDistribution, nu: SubDistribution):
    return frozenset((x, y) for x, y in rel.pairs if x in mu and y in nu)


def _pair_ok(m: LMP, rel: Relation, s: int, t: int, eps: Fraction) -> bool:
    for a in range(m.n_actions):
        mu, nu = m.tau(s, a), m.tau(t, a)
        if not hall_feasible(mu, nu, _edges(rel, mu, nu), eps):
            return False
    return True


def is_eps_simulation_bruteforce(m: LMP, rel: Relation, eps) -> bool:
    """Check every ``X`` inside each source support directly."""
    eps = to_fraction(eps)
    for s, t in rel.pairs:
        for a in range(m.n_actions):
            mu, nu = m.tau(s, a), m.tau(t, a)
            if len(mu) > BRUTEFORCE_SUPPORT_LIMIT:
                raise ValueError(f"support of ({m.states[s]}, {m.actions[a]}) too large to enumerate")
            items = sorted(mu.support)
            for r in range(1, len(items) + 1):
                for xs in itertools.combinations(items, r):
                    if mu.measure(xs) > nu.measure(rel.image(xs)) + eps:
                        return False
    return True


def first_failing_pair(m: LMP, rel: Relation, eps) -> tuple[int, int, int] | None:
    """First ``(s, t, action)`` in sorted order whose transfer condition fails."""
    eps = to_fraction(eps)
    for s, t in sorted(rel.pairs):
        for a in range(m.n_actions):
            mu, nu = m.tau(s, a), m.tau(t, a)
            if not hall_feasible(mu, nu, _edges(rel, mu, nu), eps):
                return s, t, a
    return None


def is_eps_simulation(m: LMP, rel: Relation, eps) -> bool:
    """Flow-based check: one Hall condition per related pair and action."""
    eps = to_fraction(eps)
    return all(_pair_ok(m, rel, s, t, eps) for s, t in rel.pairs)


def is_eps_bisimulation(m: LMP, rel: Relation, eps) -> bool:
    return rel.is_symmetric() and is_eps_simulation(m, rel, eps)


def _refine(m: LMP, start: Iterable[tuple[int, int]], eps: Fraction, symmetric: bool,
            order: Sequence[tuple[int, int]] | None = None) -> Relation:
    current = set(start)
    while True:
        rel = Relation(current)
        scan = [p for p in (order if order is not None else sorted(current)) if p in current]
        removed = False
        for s, t in scan:
            if (s, t) not in current:
                continue
            ok = _pair_ok(m, rel, s, t, eps)
            if ok and symmetric:
                ok = _pair_ok(m, rel, t, s, eps)
            if not ok:
                current.discard((s, t))
                if symmetric:
                    current.discard((t, s))
                removed = True
                rel = Relation(current)
        if not removed:
            return Relation(current, symmetric=symmetric)


def greatest_eps_simulation(m: LMP, eps, order: Sequence[tuple[int, int]] | None = None,
                            start: Relation | None = None) -> Relation:
    """Largest eps-simulation, by deleting failing pairs until nothing changes.

    ``order`` fixes the scan order (the result does not depend on it);
    ``start`` may be any relation known to contain the answer.
    """
    eps = to_fraction(eps)
    n = m.n_states
    base = start.pairs if start is not None else itertools.product(range(n), repeat=2)
    return _refine(m, base, eps, symmetric=False, order=order)


def greatest_eps_bisimulation(m: LMP, eps, order: Sequence[tuple[int, int]] | None = None,
                              start: Relation | None = None) -> Relation:
    """Largest symmetric eps-simulation."""
    eps = to_fraction(eps)
    n = m.n_states
    base = start.pairs if start is not None else itertools.product(range(n), repeat=2)
    return _refine(m, base, eps, symmetric=True, order=order)


def bisimilarity(m: LMP) -> Relation:
    """Exact probabilistic bisimilarity."""
    return greatest_eps_bisimulation(m, ZERO)


def max_coupled_mass(mu: SubDistribution, nu: SubDistribution, rel: Relation) -> Fraction:
    return max_transport(TransportProblem(dict(mu.items()), dict(nu.items()), _edges(rel, mu, nu))).value


def find_eps_coupling(mu: SubDistribution, nu: SubDistribution, rel: Relation, eps) -> EpsCoupling | None:
    """Max-flow coupling over ``rel``; None when it falls short of ``mass(mu) - eps``."""
    eps = to_fraction(eps)
    result = max_transport(TransportProblem(dict(mu.items()), dict(nu.items()), _edges(rel, mu, nu)))
    if result.value < mu.mass - eps:
        return None
    return EpsCoupling(rel, dict(result.assignment), eps)


def coupling_violations(beta: EpsCoupling, mu: SubDistribution, nu: SubDistribution) -> list[str]:
    """Human-readable reasons ``beta`` is not an eps-coupling; empty when it is.

    Messages start with ``condition 1``, ``condition 2``, ``condition 3`` or
    ``support`` so callers can report which requirement broke.
    """
    out = []
    for pair, w in beta.weights.items():
        if w <= 0:
            out.append(f"support: weight {w} at {pair} is not positive")
        if pair not in beta.relation:
            out.append(f"support: {pair} carries weight but is not in the relation")
    if any(w < 0 for w in beta.weights.values()):
        return out
    left, right = beta.left_marginal(), beta.right_marginal()
    for x, w in sorted(left.items()):
        if w > mu[x]:
            out.append(f"condition 1: left marginal {w} exceeds {mu[x]} at state {x}")
    for y, w in sorted(right.items()):
        if w > nu[y]:
            out.append(f"condition 2: right marginal {w} exceeds {nu[y]} at state {y}")
    if mu.mass > beta.total + beta.epsilon:
        out.append(f"condition 3: mass {mu.mass} exceeds coupled mass {beta.total} + {beta.epsilon}")
    elif len(mu) <= SUBSET_CHECK_LIMIT:
        items = sorted(mu.support)
        for r in range(1, len(items) + 1):
            for xs in itertools.combinations(items, r):
                if mu.measure(xs) > left.measure(xs) + beta.epsilon:
                    out.append(f"condition 3: subset {list(xs)} has mass {mu.measure(xs)} "
                               f"above coupled {left.measure(xs)} + {beta.epsilon}")
                    return out
    return out


def verify_eps_coupling(beta: EpsCoupling, mu: SubDistribution, nu: SubDistribution) -> bool:
    return not coupling_violations(beta, mu, nu)


def build_span_witness(m: LMP, rel: Relation, eps) -> SpanWitness | None:
    """Attach an eps-coupling to every (pair, action); None if some pair has none."""
    eps = to_fraction(eps)
    b = {}
    for s, t in sorted(rel.pairs):
        for a in range(m.n_actions):
            beta = find_eps_coupling(m.tau(s, a), m.tau(t, a), rel, eps)
            if beta is None:
                return None
            b[(s, t, a)] = beta
    return SpanWitness(rel, eps, b)


def verify_span_lax(m: LMP, w: SpanWitness, mode: Literal["sim", "bisim"] = "sim") -> bool:
    """Check the lax span diagram through the pointwise and eps orders.

    Left leg: ``marginal_1(beta) <= tau_a(s)`` and ``tau_a(s) <=_eps marginal_1(beta)``.
    Right leg: ``marginal_2(beta) <= tau_a(t)``; in bisim mode also
    ``tau_a(t) <=_eps marginal_2(beta)``.
    """
    if mode not in ("sim", "bisim"):
        raise ValueError(f"unknown mode {mode!r}")
    for s, t in w.relation.pairs:
        for a in range(m.n_actions):
            beta = w.b.get((s, t, a))
            if beta is None:
                return False
            if any(p not in w.relation for p in beta.weights):
                return False
            mu, nu = m.tau(s, a), m.tau(t, a)
            left, right = beta.left_marginal(), beta.right_marginal()
            if not (sub_order(left, mu) and eps_order(mu, left, w.epsilon) and sub_order(right, nu)):
                return False
            if mode == "bisim" and not eps_order(nu, right, w.epsilon):
                return False
    return True
