import random
import threading
from fractions import Fraction as F

import pytest

from lpbisim import (LMP, PseudoMetric, SubDistribution, apply_delta_k, apply_delta_lp,
                     bisim_distance_metric, bisimilarity, check_fixpoint_lp, compare_table,
                     dirac, dstar_brackets, dstar_matrix, dstar_pair, eps_ball_relation,
                     greatest_eps_bisimulation, is_eps_simulation, iterate_delta_k,
                     iterate_delta_lp, kantorovich_distance)
from lpbisim.generate import random_lmp, random_pseudometric
from lpbisim.metricfix import BisimulationCache
from lpbisim.models import channels, leaky_pair

TOL = F(1, 2**20)


@pytest.fixture(scope="module")
def chans():
    return channels({"eps": "1/10", "0": 0, "g": "3/10"})


def _ix(m, *names):
    return [m.state_index(n) for n in names]


def test_channel_brackets(chans):
    ce, c0, cg = _ix(chans, "c_eps", "c_0", "c_g")
    b = dstar_pair(chans, ce, c0, F(1, 2**30))
    assert F(1, 10) in b and b.width <= F(1, 2**30)
    assert F(1, 5) in dstar_pair(chans, ce, cg, F(1, 2**30))
    assert dstar_pair(chans, ce, ce) == dstar_pair(chans, ce, ce, TOL)
    assert (dstar_pair(chans, ce, ce).lower, dstar_pair(chans, ce, ce).upper) == (0, 0)


def test_leaky_bracket():
    m = leaky_pair(F(3, 10))
    s, t = _ix(m, "s", "t")
    assert F(3, 10) in dstar_pair(m, s, t)


def test_dstar_rejects_bad_tol(chans):
    with pytest.raises(ValueError):
        dstar_pair(chans, 0, 1, 0)


def test_dstar_matrix(chans):
    d = dstar_matrix(chans, TOL)
    ce, cg = _ix(chans, "c_eps", "c_g")
    assert abs(d(ce, cg) - F(1, 5)) <= TOL
    one = LMP.build(["s"], ["a"], {("s", "a"): {"s": 1}})
    assert dstar_matrix(one, TOL) == PseudoMetric.zero(1)


def test_cache_shares_relations(chans):
    cache = BisimulationCache(chans)
    dstar_brackets(chans, TOL, cache)
    n_probes = len(cache)
    dstar_brackets(chans, TOL, cache)
    assert len(cache) == n_probes
    for eps in list(cache._keys)[:5]:
        assert cache(eps) == greatest_eps_bisimulation(chans, eps)


def test_cache_threads(chans):
    cache = BisimulationCache(chans)
    out = {}

    def work(k):
        out[k] = dstar_matrix(chans, TOL, cache)

    threads = [threading.Thread(target=work, args=(k,)) for k in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert len({v for v in out.values()}) == 1


def test_iterate_one_state():
    one = LMP.build(["s"], ["a"], {("s", "a"): {"s": 1}})
    rep = iterate_delta_lp(one)
    assert rep.metric == PseudoMetric.zero(1) and rep.residual == 0 and rep.iterations == 1 and rep.converged


def test_iterate_from_fixpoint_stops_at_once():
    # Each state has its own action with full mass, so non-bisimilar states stay at distance 1.
    m = LMP.build(["p", "q", "r"], ["a", "b"],
                  {("p", "a"): {"p": 1}, ("q", "b"): {"q": 1}, ("r", "b"): {"q": 1}})
    d = bisim_distance_metric(m)
    assert d(1, 2) == 0 and d(0, 1) == 1
    assert check_fixpoint_lp(m, d) == 0
    rep = iterate_delta_lp(m, d)
    assert (rep.iterations, rep.residual) == (1, 0)


def test_bisim_metric_not_always_fixed():
    m = leaky_pair(F(3, 10))
    d = bisim_distance_metric(m)
    assert check_fixpoint_lp(m, d) == F(7, 10)
    rep = iterate_delta_lp(m, d)
    assert rep.iterations > 1


def test_bisim_distance_metric_examples(chans):
    twins = LMP.build(["p", "q"], ["a"], {("p", "a"): {"q": "1/2"}, ("q", "a"): {"p": "1/2"}})
    assert bisim_distance_metric(twins) == PseudoMetric.zero(2)
    ce, c0 = _ix(chans, "c_eps", "c_0")
    assert bisim_distance_metric(chans)(ce, c0) == 1


def test_zero_metric_not_fixpoint_on_chain():
    m = LMP.build(["s", "t"], ["a"], {("s", "a"): {"s": 1}})
    assert check_fixpoint_lp(m, PseudoMetric.zero(2)) > 0


def test_converged_residual(chans):
    rep = iterate_delta_lp(chans, tol=F(1, 100), cap=50)
    assert rep.converged and rep.residual <= F(1, 100)


def test_eps_ball_relation():
    rng = random.Random(41)
    d = random_pseudometric(rng, 4)
    assert len(eps_ball_relation(d, F(3, 2))) == 16
    m = leaky_pair(F(3, 10))
    assert eps_ball_relation(bisim_distance_metric(m), F(1, 2)) == bisimilarity(m)
    with pytest.raises(ValueError):
        eps_ball_relation(d, 0)


def test_kantorovich_examples():
    d = PseudoMetric([[0, F(2, 5)], [F(2, 5), 0]])
    mu = SubDistribution({0: F(1, 3), 1: F(1, 2)})
    assert kantorovich_distance(dirac(0), dirac(1), d) == F(2, 5)
    assert kantorovich_distance(mu, mu, d) == 0
    # On two points with the discrete metric the optimum moves |mu(0) - nu(0)|.
    disc = PseudoMetric.discrete(2)
    for p in (F(0), F(1, 4), F(3, 5), F(1)):
        for q in (F(1, 10), F(1, 2)):
            assert kantorovich_distance(SubDistribution({0: p, 1: 1 - p}), SubDistribution({0: q, 1: 1 - q}), disc) == abs(p - q)


def test_delta_k_examples():
    one = LMP.build(["s"], ["a"], {("s", "a"): {"s": 1}})
    assert apply_delta_k(one, PseudoMetric.zero(1)) == PseudoMetric.zero(1)
    m = leaky_pair(F(3, 10))
    s, t = _ix(m, "s", "t")
    assert apply_delta_k(m, PseudoMetric.zero(m.n_states))(s, t) == 0
    twins = LMP.build(["p", "q"], ["a"], {("p", "a"): {"q": "1/2"}, ("q", "a"): {"p": "1/2"}})
    rep = iterate_delta_k(twins, cap=10)
    assert rep.metric == PseudoMetric.zero(2) and rep.converged


def test_delta_k_channel_first_steps(chans):
    ce, c0 = _ix(chans, "c_eps", "c_0")
    hist = iterate_delta_k(chans, cap=4, keep_history=True).history
    # Mass mismatch costs 1/10 at the first send; the ack step in between adds nothing new.
    assert [h(ce, c0) for h in hist] == [F(1, 10), F(1, 10), F(19, 100), F(19, 100)]
    assert not iterate_delta_k(chans, cap=4).converged


def test_compare_table(chans):
    rows = compare_table(chans, TOL, iters=100)
    assert [(r.s, r.t) for r in rows] == sorted((r.s, r.t) for r in rows)
    row = next(r for r in rows if (r.s, r.t) == ("c_0", "c_eps"))
    assert F(1, 10) in row.dstar and row.dk_iterate >= F(99, 100)
    twins = LMP.build(["p", "q"], ["a"], {("p", "a"): {"q": "1/2"}, ("q", "a"): {"p": "1/2"}})
    (row,) = compare_table(twins, TOL, iters=5)
    assert row.dstar.upper == 0 and row.dk_iterate == 0


def _models(seed, count, max_states=5):
    rng = random.Random(seed)
    return [random_lmp(rng, rng.randint(2, max_states), rng.randint(1, 2), twins=rng.randint(0, 1))
            for _ in range(count)]


def test_dstar_is_fixpoint_up_to_tol():
    for m in _models(42, 15):
        d = dstar_matrix(m, TOL)
        assert apply_delta_lp(m, d).max_abs_diff(d) <= 2 * TOL


def test_dstar_triangle_and_kernel():
    for m in _models(43, 15):
        cache = BisimulationCache(m)
        d = dstar_matrix(m, TOL, cache)
        n = m.n_states
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    assert d(x, z) <= d(x, y) + d(y, z) + 3 * TOL
        bis = bisimilarity(m)
        brackets = dstar_brackets(m, TOL, cache)
        for (i, j), b in brackets.items():
            assert (b.lower == 0) == ((i, j) in bis) or b.upper <= TOL
            if (i, j) in bis:
                assert b.upper == 0
                assert all((i, j) in cache(e) for e in cache._keys)


def test_fixpoint_dominance():
    for m in _models(44, 15):
        lower = {k: b.lower for k, b in dstar_brackets(m, TOL).items()}
        fixpoints = [iterate_delta_lp(m, cap=200).metric,
                     iterate_delta_lp(m, PseudoMetric.discrete(m.n_states), cap=200).metric,
                     bisim_distance_metric(m)]
        for d in fixpoints:
            if check_fixpoint_lp(m, d) != 0:
                continue
            assert all(d(i, j) >= lo - TOL for (i, j), lo in lower.items())


def test_relation_level_for_exact_fixpoints():
    rng = random.Random(45)
    for m in _models(45, 15):
        d = iterate_delta_lp(m, cap=200).metric
        assert check_fixpoint_lp(m, d) == 0
        for _ in range(4):
            eps = F(rng.randint(1, 20), 20)
            r = eps_ball_relation(d, eps)
            assert is_eps_simulation(m, r.union(r.transpose()), eps)
