import heapq

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from conftest import binom_se, within
from instances import oracle_instances, small_sir
from sirim import InstanceError, make_instance
from sirim.exact import exact_sigma
from sirim.live_edge import sample_live_tsir
from sirim.probability import joint_outedge_distribution
from sirim.rr import (RRCollection, build_collection, coverage_fraction, estimate_spread,
                      sample_rr_ic, sample_rr_sir, sample_rr_tsir)

N = 100_000


def member_freq(coll, n):
    return np.bincount(coll.set_members, minlength=n) / len(coll)


def test_ic_examples():
    iso = make_instance(3, [], "ic")
    assert sample_rr_ic(iso, 5, root=1).members == {1}
    sure = make_instance(2, [(0, 1, 1.0)], "ic")
    assert sample_rr_ic(sure, 5, root=1).members == {0, 1}
    coll = build_collection(make_instance(2, [(0, 1, 0.5)], "ic"), N, 1, root=1)
    assert within(member_freq(coll, 2)[0], 0.5, binom_se(0.5, N), 3)
    with pytest.raises(InstanceError):
        sample_rr_sir(sure, 1)


def test_sir_chain_marginals():
    chain = make_instance(3, [(0, 1, 0.5), (1, 2, 0.5)], "sir", 0.5)
    f = member_freq(build_collection(chain, N, 2, root=2), 3)
    assert within(f[1], 2 / 3, binom_se(2 / 3, N), 3)
    assert within(f[0], 4 / 9, binom_se(4 / 9, N), 3)


@pytest.mark.parametrize("betas, gamma", [([0.5, 0.5], 0.5), ([0.2, 0.5, 0.7], 0.3),
                                          ([0.1, 0.1, 0.4, 0.9], 0.6)])
def test_sir_join_probability_from_frontier(betas, gamma):
    # members 0..d-1 are forced into the set from root 0; node d has one edge into each
    d = len(betas)
    edges = [(i, 0, 1.0) for i in range(1, d)] + [(d, i, b) for i, b in enumerate(betas)]
    gam = np.full(d + 1, 1.0)
    gam[d] = gamma
    inst = make_instance(d + 1, edges, "sir", gam)
    f = member_freq(build_collection(inst, N, 3, root=0), d + 1)
    expected = 1 - joint_outedge_distribution(betas, gamma).all_blocked()
    assert within(f[d], expected, binom_se(expected, N), 3)


def test_tsir_chain_examples():
    chain = make_instance(3, [(0, 1, 1.0), (1, 2, 1.0)], "tsir", 1.0, horizon=1)
    for s in range(20):
        assert sample_rr_tsir(chain, s, root=2).members == {1, 2}
        assert sample_rr_tsir(chain.with_model("tsir", 2), s, root=2).members == {0, 1, 2}


def test_singleton_and_bad_count():
    solo = make_instance(1, [], "sir", 0.5)
    coll = build_collection(solo, 50, 0)
    assert all(r.members == {0} for r in coll.sets)
    with pytest.raises(ValueError):
        build_collection(solo, 0, 0)


def test_coverage_examples():
    coll = RRCollection.from_sets([{1, 2}, {2, 3}, {4}], 5)
    assert coverage_fraction(coll, []) == 0.0
    assert coverage_fraction(coll, [2]) == pytest.approx(2 / 3)
    assert coverage_fraction(coll, [2, 4]) == 1.0


def test_determinism_and_prefix_stability():
    inst = small_sir(4, n=60, density=0.05)
    a = build_collection(inst, 5000, 11)
    b = build_collection(inst, 5000, 11, threads=1)
    grown = RRCollection(inst, 11, threads=3)
    for step in (7, 130, 2049, 4096, 5000):
        grown.extend_to(step)
    assert np.array_equal(a.set_members, b.set_members)
    assert np.array_equal(a.set_members, grown.set_members)
    assert np.array_equal(a.works, grown.works) and np.array_equal(a.roots, grown.roots)


def test_inverted_index_is_transpose():
    inst = small_sir(6, n=40, density=0.08)
    coll = build_collection(inst, 3000, 2)
    pairs_by_set = {(i, int(u)) for i in range(len(coll))
                    for u in coll.set_members[coll.set_ptr[i]:coll.set_ptr[i + 1]]}
    pairs_by_node = {(int(i), u) for u in range(inst.n) for i in coll.sets_containing(u)}
    assert pairs_by_set == pairs_by_node


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["ic", "sir", "tsir"]))
def test_membership_and_work_bounds(inst_seed, model):
    base = small_sir(inst_seed, n=15, density=0.2)
    inst = {"ic": base.matched_ic(), "sir": base, "tsir": base.with_model("tsir", 3)}[model]
    g = inst.graph
    indeg = np.diff(g.in_ptr)
    coll = build_collection(inst, 300, inst_seed)
    for r in coll.sets:
        assert r.root in r.members
        ancestors = {u for u in range(g.n) if r.root in g.reachable_from([u])}
        assert r.members <= ancestors
        assert r.work >= len(r.members) - 1
        explored = r.members if model != "tsir" else ancestors
        assert r.work <= sum(indeg[u] for u in explored)


def _t_reach_to_root(inst, live, root):
    """Dijkstra on reversed live edges; returns nodes at span distance <= T."""
    g = inst.graph
    dist = {root: 0}
    heap = [(0, root)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w, e in g.in_adj(u):
            if e in live.live:
                nd = d + live.span[e]
                if nd <= inst.horizon and nd < dist.get(w, inst.horizon + 1):
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
    return set(dist)


@pytest.mark.parametrize("seed, T", [(40, 2), (41, 3), (42, 5)])
def test_tsir_prune_against_reference(seed, T):
    inst = small_sir(seed, n=8, density=0.35).with_model("tsir", T)
    root = 0
    ref = np.zeros(inst.n)
    runs = 20_000
    for s in range(runs):
        for u in _t_reach_to_root(inst, sample_live_tsir(inst, s), root):
            ref[u] += 1
    ref /= runs
    f = member_freq(build_collection(inst, N, seed, root=root), inst.n)
    se = np.sqrt(np.maximum(ref * (1 - ref), 1e-9) * (1 / runs + 1 / N))
    assert np.all(np.abs(f - ref) <= 4 * se + 1e-12), (f, ref)


def test_tsir_literal_matches_fast():
    inst = small_sir(43, n=8, density=0.35).with_model("tsir", 3)
    fast = member_freq(build_collection(inst, N, 1, root=0), inst.n)
    slow = member_freq(build_collection(inst, N, 2, root=0, literal=True), inst.n)
    se = np.sqrt(np.maximum(fast * (1 - fast), 1e-9) * 2 / N)
    assert np.all(np.abs(fast - slow) <= 4 * se + 1e-12)


def test_tsir_large_horizon_matches_sir():
    sir = small_sir(44, n=8, density=0.35)
    tsir = sir.with_model("tsir", 200)
    a = member_freq(build_collection(sir, N, 5, root=0), sir.n)
    b = member_freq(build_collection(tsir, N, 6, root=0), sir.n)
    se = np.sqrt(np.maximum(a * (1 - a), 1e-9) * 2 / N)
    assert np.all(np.abs(a - b) <= 4 * se + 1e-12)


def test_gamma_one_sir_matches_ic():
    base = small_sir(45, n=6, density=0.4)
    edges = [(int(a), int(b), float(p)) for a, b, p in
             zip(base.graph.src, base.graph.dst, base.params.edge_prob)]
    sir = make_instance(6, edges, "sir", 1.0)
    a = build_collection(sir, N, 7, root=0)
    b = build_collection(sir.matched_ic(), N, 8, root=0)
    codes = lambda c: np.array([sum(1 << u for u in r.members) for r in c.sets])  # noqa: E731
    ca, cb = codes(a), codes(b)
    keys = np.union1d(ca, cb)
    table = np.vstack([np.searchsorted(keys, ca)[None], np.searchsorted(keys, cb)[None]])
    counts = np.vstack([np.bincount(t, minlength=keys.size) for t in table])
    assert stats.chi2_contingency(counts[:, counts.sum(0) > 0]).pvalue > 1e-4


def test_uniform_roots():
    inst = small_sir(46, n=10, density=0.2)
    roots = build_collection(inst, N, 9).roots
    counts = np.bincount(roots, minlength=10)
    assert stats.chisquare(counts).pvalue > 1e-4


@pytest.mark.parametrize("model", ["ic", "sir", "tsir"])
def test_spread_estimate_is_unbiased(model):
    inst = oracle_instances(model)[1]
    coll = build_collection(inst, N, 12)
    for seeds in ([0], [2, 5]):
        mean, se = estimate_spread(coll, seeds)
        assert within(mean, exact_sigma(inst, seeds), se)
