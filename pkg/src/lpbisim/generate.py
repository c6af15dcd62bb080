"""Seeded random instances for property checks and benchmarks."""

from __future__ import annotations

import random
from fractions import Fraction

from .core import LMP, PseudoMetric, SubDistribution


def random_subdistribution(rng: random.Random, carrier: int, max_support: int = 6,
                           denominator: int = 10, full: bool | None = None) -> SubDistribution:
    """Random weights on at most ``max_support`` of ``range(carrier)``, with the given denominator."""
    k = rng.randint(0, min(max_support, carrier))
    if k == 0:
        return SubDistribution()
    support = rng.sample(range(carrier), k)
    if full is None:
        full = rng.random() < 0.5
    top = max(k, denominator)
    total = top if full else rng.randint(k, top)
    # k - 1 cut points in 1..total-1 give k positive parts summing to total.
    cuts = sorted(rng.sample(range(1, total), k - 1)) if k > 1 else []
    parts = [b - a for a, b in zip([0, *cuts], [*cuts, total])]
    return SubDistribution({x: Fraction(p, top) for x, p in zip(support, parts)})


def random_lmp(rng: random.Random, n_states: int = 4, n_actions: int = 2, max_support: int = 4,
               denominator: int = 10, twins: int = 0, p_empty: float = 0.2) -> LMP:
    """Random LMP; up to ``twins`` states copy another state's transitions and are bisimilar to it."""
    base = n_states - min(twins, n_states - 1)
    trans = {}
    for s in range(base):
        for a in range(n_actions):
            if rng.random() < p_empty:
                continue
            trans[(s, a)] = random_subdistribution(rng, n_states, max_support, denominator)
    for s in range(base, n_states):
        src = rng.randrange(base)
        for a in range(n_actions):
            if (src, a) in trans:
                trans[(s, a)] = trans[(src, a)]
    return LMP(tuple(f"q{i}" for i in range(n_states)), tuple(f"a{j}" for j in range(n_actions)), trans)


def random_pseudometric(rng: random.Random, n: int, denominator: int = 8, p_zero: float = 0.15) -> PseudoMetric:
    """Random 1-bounded pseudometric: shortest paths over random rational edge weights.

    Shortest-path closure enforces the triangle inequality; some weights are
    zero so distinct points can sit at distance 0.
    """
    w = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = Fraction(0) if rng.random() < p_zero else Fraction(rng.randint(1, denominator), denominator)
            w[i][j] = w[j][i] = v
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if w[i][k] + w[k][j] < w[i][j]:
                    w[i][j] = w[i][k] + w[k][j]
    return PseudoMetric(w)


def random_map(rng: random.Random, domain: int, codomain: int) -> dict[int, int]:
    return {x: rng.randrange(codomain) for x in range(domain)}


def pullback_metric(f: dict[int, int], d_y: PseudoMetric) -> PseudoMetric:
    """``d_x(x, x') = d_y(f(x), f(x'))``, which makes ``f`` nonexpansive by construction."""
    n = len(f)
    return PseudoMetric([[d_y(f[i], f[j]) for j in range(n)] for i in range(n)])
