"""Small hand-built models used in the docs, tests and CLI demos."""

from __future__ import annotations

from typing import Mapping

from .core import LMP, ONE, PseudoMetric, SubDistribution, to_fraction


def channel(eps) -> LMP:
    """Two-state channel: ``c --send[1-eps]--> 1 --ack[1]--> c``."""
    eps = to_fraction(eps)
    trans = {("1", "ack"): {"c": ONE}}
    if eps < 1:
        trans[("c", "send")] = {"1": ONE - eps}
    return LMP.build(["c", "1"], ["send", "ack"], trans)


def channels(named_eps: Mapping[str, object]) -> LMP:
    """Disjoint union of channels; ``{"eps": "1/10"}`` gives states ``c_eps`` and ``1_eps``."""
    states, trans = [], {}
    for name, eps in named_eps.items():
        eps = to_fraction(eps)
        c, one = f"c_{name}", f"1_{name}"
        states += [c, one]
        trans[(one, "ack")] = {c: ONE}
        if eps < 1:
            trans[(c, "send")] = {one: ONE - eps}
    return LMP.build(states, ["send", "ack"], trans)


def leaky_pair(gamma) -> LMP:
    """``s`` leaks mass ``gamma`` to a dead state at every step; ``t`` never does."""
    g = to_fraction(gamma)
    trans = {("t", "a"): {"t1": ONE}, ("t1", "a"): {"t1": ONE}}
    if g < 1:
        trans[("s", "a")] = {"s1": ONE - g, "s2": g}
        trans[("s1", "a")] = {"s1": ONE - g}
    else:
        trans[("s", "a")] = {"s2": ONE}
    return LMP.build(["s", "s1", "s2", "t", "t1"], ["a"], trans)


def line_space(labels: Mapping[str, object]) -> tuple[tuple[str, ...], PseudoMetric]:
    """Points ``x_g`` on [0, 1] with ``d(x_g, x_h) = |g - h|``."""
    names = tuple(labels)
    pos = [to_fraction(labels[k]) for k in names]
    return names, PseudoMetric.from_function(len(names), lambda i, j: abs(pos[i] - pos[j]), names)


def mixture_with_far_point(gamma, names: tuple[str, ...], at: str, far: str = "x_1") -> SubDistribution:
    """``gamma * 1_far + (1 - gamma) * 1_at`` over ``names``."""
    g = to_fraction(gamma)
    return SubDistribution({names.index(far): g, names.index(at): ONE - g})


def flatten_counterexample(eps) -> dict:
    """Outer distributions over three inner ones on the discrete space {bottom, bullet}.

    Returns ``a``, ``b``, ``c`` (inner, indices 0 = bottom, 1 = bullet) and
    ``phi``, ``psi`` (outer, keyed by the inner distributions).
    """
    e = to_fraction(eps)
    a = SubDistribution({0: ONE})
    b = SubDistribution({0: ONE - e, 1: e})
    c = SubDistribution({1: ONE})
    phi = SubDistribution({a: ONE})
    psi = SubDistribution({b: ONE - e, c: e})
    return {"a": a, "b": b, "c": c, "phi": phi, "psi": psi,
            "ground": PseudoMetric.discrete(2, ("bottom", "bullet"))}
