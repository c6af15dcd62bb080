import itertools
import random
from fractions import Fraction as F

import pytest

from lpbisim import (LMP, EpsCoupling, Relation, SpanWitness, SubDistribution, bisimilarity,
                     build_span_witness, coupling_violations, find_eps_coupling,
                     greatest_eps_bisimulation, greatest_eps_simulation, is_eps_bisimulation,
                     is_eps_simulation, is_eps_simulation_bruteforce, verify_eps_coupling,
                     verify_span_lax)
from lpbisim.generate import random_lmp, random_subdistribution
from lpbisim.models import channels, leaky_pair

G = F(3, 10)


@pytest.fixture
def leaky():
    m = leaky_pair(G)
    return m, {name: m.state_index(name) for name in m.states}


def _rel(ix, pairs, symmetric=False):
    return Relation([(ix[a], ix[b]) for a, b in pairs], symmetric=symmetric)


def test_leaky_relations(leaky):
    m, ix = leaky
    r = _rel(ix, [("s", "t"), ("s1", "t1")])
    assert is_eps_simulation_bruteforce(m, r, G) and is_eps_simulation(m, r, G)
    rr = _rel(ix, [("s", "t"), ("s1", "t1")], symmetric=True)
    assert is_eps_bisimulation(m, rr, G)
    r0 = _rel(ix, [("s", "t"), ("s1", "t1"), ("s2", "t1")])
    assert is_eps_simulation_bruteforce(m, r0, 0) and is_eps_simulation(m, r0, 0)
    assert is_eps_simulation_bruteforce(m, Relation(), F(1, 7))


def test_t_not_simulated_by_s(leaky):
    m, ix = leaky
    t, s = ix["t"], ix["s"]
    n = m.n_states
    others = [p for p in itertools.product(range(n), repeat=2) if p != (t, s)]
    # Exhaustive over relations containing (t, s) would be 2^24; the greatest one decides it.
    assert (t, s) not in greatest_eps_simulation(m, 0)
    for extra in itertools.combinations(others, 2):
        assert not is_eps_simulation(m, Relation([(t, s), *extra]), 0)


def test_greatest_relations(leaky):
    m, ix = leaky
    sim0 = greatest_eps_simulation(m, 0)
    assert (ix["s"], ix["t"]) in sim0 and (ix["t"], ix["s"]) not in sim0
    assert (ix["s"], ix["t"]) in greatest_eps_bisimulation(m, G)
    assert (ix["s"], ix["t"]) not in greatest_eps_bisimulation(m, F(1, 5))
    assert greatest_eps_simulation(m, 1) == Relation.full(m.n_states)
    assert Relation.identity(m.n_states) <= greatest_eps_bisimulation(m, 0)


def test_bisimilarity_examples():
    twin = LMP.build(["p", "q", "r"], ["a"], {("p", "a"): {"r": "1/2"}, ("q", "a"): {"r": "1/2"}})
    assert (0, 1) in bisimilarity(twin)
    m = channels({"eps": "1/10", "0": 0})
    assert (m.state_index("c_eps"), m.state_index("c_0")) not in bisimilarity(m)


def _random_relation(rng, n, p=0.5):
    return Relation([(s, t) for s in range(n) for t in range(n) if rng.random() < p])


def test_order_independence():
    rng = random.Random(31)
    for _ in range(100):
        m = random_lmp(rng, rng.randint(2, 5), rng.randint(1, 2))
        eps = F(rng.randint(0, 5), 10)
        pairs = list(itertools.product(range(m.n_states), repeat=2))
        base_sim, base_bis = greatest_eps_simulation(m, eps), greatest_eps_bisimulation(m, eps)
        for _ in range(3):
            rng.shuffle(pairs)
            assert greatest_eps_simulation(m, eps, order=pairs) == base_sim
            assert greatest_eps_bisimulation(m, eps, order=pairs) == base_bis


def test_greatest_is_largest():
    rng = random.Random(32)
    for _ in range(100):
        m = random_lmp(rng, rng.randint(1, 4), rng.randint(1, 2))
        eps = F(rng.randint(0, 5), 10)
        big = greatest_eps_simulation(m, eps)
        assert is_eps_simulation(m, big, eps)
        r = _random_relation(rng, m.n_states)
        if is_eps_simulation(m, r, eps):
            assert r <= big
        assert greatest_eps_bisimulation(m, 0) == bisimilarity(m)


def test_monotone_in_eps():
    rng = random.Random(33)
    for _ in range(100):
        m = random_lmp(rng, rng.randint(2, 5), rng.randint(1, 2))
        e1, e2 = sorted(F(rng.randint(0, 10), 10) for _ in range(2))
        assert greatest_eps_simulation(m, e1) <= greatest_eps_simulation(m, e2)
        assert greatest_eps_bisimulation(m, e1) <= greatest_eps_bisimulation(m, e2)


def test_approximate_triangle():
    rng = random.Random(34)
    for _ in range(100):
        m = random_lmp(rng, rng.randint(2, 5), rng.randint(1, 2))
        e1, e2 = F(rng.randint(0, 5), 10), F(rng.randint(0, 5), 10)
        b1, b2, b12 = (greatest_eps_bisimulation(m, e) for e in (e1, e2, e1 + e2))
        for s, u in b1:
            for u2, t in b2:
                if u == u2:
                    assert (s, t) in b12


def test_union_of_simulations():
    rng = random.Random(35)
    for _ in range(200):
        m = random_lmp(rng, rng.randint(2, 4), rng.randint(1, 2))
        eps = F(rng.randint(0, 5), 10)
        sim = greatest_eps_simulation(m, eps)
        r1 = Relation([p for p in sim if rng.random() < 0.6])
        r2 = Relation([p for p in sim if rng.random() < 0.6])
        r1 = greatest_eps_simulation(m, eps, start=r1)
        r2 = greatest_eps_simulation(m, eps, start=r2)
        assert is_eps_simulation(m, r1.union(r2), eps)


# Frozen from a seeded random search.
ASYMMETRY = LMP.build(["q0", "q1", "q2"], ["a"],
                      {("q1", "a"): {"q1": "4/5"}, ("q2", "a"): {"q0": "2/5", "q1": "3/5"}})


def test_two_way_simulation_is_not_bisimulation():
    eps = F(1, 4)
    sim = greatest_eps_simulation(ASYMMETRY, eps)
    assert (1, 2) in sim and (2, 1) in sim
    assert (1, 2) not in greatest_eps_bisimulation(ASYMMETRY, eps)


def test_coupling_examples(leaky):
    m, ix = leaky
    mu = SubDistribution({0: F(1, 3), 1: F(2, 3)})
    beta = find_eps_coupling(mu, mu, Relation.identity(2), 0)
    assert beta.weights == {(0, 0): F(1, 3), (1, 1): F(2, 3)}
    assert verify_eps_coupling(beta, mu, mu)
    assert find_eps_coupling(m.tau(ix["t1"], 0), m.tau(ix["s2"], 0), _rel(ix, [("t1", "s2")]), F(99, 100)) is None


def test_zero_coupling():
    mu = SubDistribution({0: F(1, 3), 1: F(1, 3)})
    rel = Relation.identity(2)
    assert verify_eps_coupling(EpsCoupling(rel, {}, F(2, 3)), mu, mu)
    bad = coupling_violations(EpsCoupling(rel, {}, F(1, 2)), mu, mu)
    assert bad and bad[0].startswith("condition 3")


def test_coupling_violation_kinds():
    mu = SubDistribution({0: F(1, 2)})
    nu = SubDistribution({1: F(1, 4)})
    rel = Relation([(0, 1)])
    msgs = coupling_violations(EpsCoupling(rel, {(0, 1): F(1, 2)}, 0), mu, nu)
    assert [s.split(":")[0] for s in msgs] == ["condition 2"]
    msgs = coupling_violations(EpsCoupling(rel, {(1, 0): F(1, 4)}, 1), mu, nu)
    assert msgs[0].startswith("support")
    msgs = coupling_violations(EpsCoupling(rel, {(0, 1): F(-1, 4)}, 1), mu, nu)
    assert msgs and all(s.startswith("support") for s in msgs)


def test_lemma_subset_form_equivalence():
    # With condition 1 in force, the global mass bound and the subset form agree.
    rng = random.Random(36)
    for _ in range(1000):
        n = rng.randint(1, 6)
        mu = random_subdistribution(rng, n, max_support=n)
        left = {x: w * F(rng.randint(0, 4), 4) for x, w in mu.items()}
        beta = EpsCoupling(Relation.identity(n), {(x, x): w for x, w in left.items() if w}, F(rng.randint(0, 10), 10))
        global_ok = mu.mass <= beta.total + beta.epsilon
        lm = beta.left_marginal()
        subset_ok = all(mu.measure(xs) <= lm.measure(xs) + beta.epsilon
                        for r in range(n + 1) for xs in itertools.combinations(range(n), r))
        assert global_ok == subset_ok == verify_eps_coupling(beta, mu, mu)


def test_found_couplings_verify():
    rng = random.Random(37)
    for _ in range(300):
        n = rng.randint(1, 6)
        mu = random_subdistribution(rng, n, max_support=n)
        nu = random_subdistribution(rng, n, max_support=n)
        rel = _random_relation(rng, n)
        beta = find_eps_coupling(mu, nu, rel, F(rng.randint(0, 10), 10))
        if beta is not None:
            assert verify_eps_coupling(beta, mu, nu)


def test_span_witness_examples(leaky):
    m, ix = leaky
    r = _rel(ix, [("s", "t"), ("s1", "t1")])
    w = build_span_witness(m, r, G)
    assert w is not None and verify_span_lax(m, w, "sim")
    full = Relation.full(m.n_states)
    assert build_span_witness(m, full, 1) is not None
    assert verify_span_lax(m, SpanWitness(Relation(), G, {}), "sim")
    with pytest.raises(ValueError):
        verify_span_lax(m, w, "other")


def test_halved_coupling_breaks_lax_square(leaky):
    m, ix = leaky
    w = build_span_witness(m, _rel(ix, [("s", "t"), ("s1", "t1")]), G)
    assert verify_span_lax(m, w, "sim")
    key = (ix["s"], ix["t"], 0)
    assert m.tau(ix["s"], 0).mass > 2 * G
    b = dict(w.b)
    b[key] = EpsCoupling(w.b[key].relation, {p: v / 2 for p, v in w.b[key].weights.items()}, G)
    assert not verify_span_lax(m, SpanWitness(w.relation, G, b), "sim")


def test_bisim_mode_on_symmetric_relations():
    rng = random.Random(38)
    for _ in range(200):
        m = random_lmp(rng, rng.randint(2, 5), rng.randint(1, 2))
        eps = F(rng.randint(0, 5), 10)
        rel = greatest_eps_bisimulation(m, eps)
        w = build_span_witness(m, rel, eps)
        assert w is not None and verify_span_lax(m, w, "bisim")
