import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import binom_se, within
from instances import DIAMOND_IC, DIAMOND_SIR, diamond, small_sir
from sirim import InstanceError, make_instance
from sirim.coupling import coupled_batch, coupled_rr, dominance_report
from sirim.probability import aggregate_edge_prob
from sirim.rr import build_collection

N = 100_000


def test_gamma_one_sides_coincide():
    base = small_sir(50, n=12, density=0.25)
    edges = [(int(a), int(b), float(p)) for a, b, p in
             zip(base.graph.src, base.graph.dst, base.params.edge_prob)]
    inst = make_instance(12, edges, "sir", 1.0)
    st_ = coupled_batch(inst, 20_000, 1)
    assert st_.violations == 0
    assert np.array_equal(st_.rr_ic_ptr, st_.rr_sir_ptr)
    assert np.array_equal(st_.rr_ic, st_.rr_sir)


def test_single_edge_shared_draw():
    inst = make_instance(2, [(0, 1, 0.5)], "sir", 0.5)
    p = aggregate_edge_prob(0.5, 0.5)
    both = 0
    for s in range(20_000):
        out = coupled_rr(inst, 1, s)
        assert out.rr_ic == out.rr_sir
        both += 0 in out.rr_sir
    assert within(both / 20_000, p, binom_se(p, 20_000), 4)


def test_rejects_non_sir():
    with pytest.raises(InstanceError):
        coupled_rr(diamond("ic"), 3, 0)
    with pytest.raises(ValueError):
        coupled_rr(diamond(), 9, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 2 ** 40))
def test_containment_and_arborescence(inst_seed, stream):
    inst = small_sir(inst_seed, n=15, density=0.2)
    g = inst.graph
    root = stream % inst.n
    out = coupled_rr(inst, root, stream, full_reveal=True)
    assert out.rr_sir <= out.rr_ic <= out.full_ic
    assert out.root in out.rr_sir
    # each non-root SIR member has exactly one live edge, into the set; no cycles
    parent = {}
    for e in out.edges_sir:
        u, v = int(g.src[e]), int(g.dst[e])
        assert u in out.rr_sir and v in out.rr_sir
        assert u not in parent
        parent[u] = v
    assert set(parent) == out.rr_sir - {out.root}
    for u in out.rr_sir:
        seen = set()
        while u != out.root:
            assert u not in seen
            seen.add(u)
            u = parent[u]
    assert out.edges_sir <= set(out.revealed) and out.edges_ic <= set(out.revealed)
    assert len(set(out.revealed)) == len(out.revealed)


def test_batch_containment_random_instances():
    for seed in range(3):
        inst = small_sir(60 + seed, n=50, density=0.06)
        assert coupled_batch(inst, 30_000, seed).violations == 0


def test_sir_side_marginal_matches_standalone():
    inst = small_sir(61, n=8, density=0.35)
    root = 0
    cp = coupled_batch(inst, N, 3, root=root).member_frequency(inst.n, "sir")
    ref = np.bincount(build_collection(inst, N, 4, root=root).set_members, minlength=inst.n) / N
    se = np.sqrt(np.maximum(ref * (1 - ref), 1e-9) * 2 / N)
    assert np.all(np.abs(cp - ref) <= 4 * se + 1e-12)


def test_full_reveal_marginals_match_standalone():
    inst = small_sir(62, n=7, density=0.35)
    root, runs = 0, 8000
    full_ic = np.zeros(inst.n)
    full_sir = np.zeros(inst.n)
    for s in range(runs):
        out = coupled_rr(inst, root, s, full_reveal=True)
        for u in out.full_ic:
            full_ic[u] += 1
        for u in out.full_sir:
            full_sir[u] += 1
    full_ic /= runs
    full_sir /= runs
    ref_ic = np.bincount(build_collection(inst.matched_ic(), N, 5, root=root).set_members,
                         minlength=inst.n) / N
    ref_sir = np.bincount(build_collection(inst, N, 6, root=root).set_members,
                          minlength=inst.n) / N
    for got, ref in ((full_ic, ref_ic), (full_sir, ref_sir)):
        se = np.sqrt(np.maximum(ref * (1 - ref), 1e-9) * (1 / runs + 1 / N))
        assert np.all(np.abs(got - ref) <= 4 * se + 1e-12), (got, ref)


def test_diamond_frequency_from_sink():
    st_ = coupled_batch(diamond(), N, 7, root=3)
    f = st_.member_frequency(4, "sir")
    assert within(f[0], 6 / 7, binom_se(6 / 7, N), 4)
    assert st_.violations == 0


def test_batch_thread_invariance():
    inst = small_sir(63, n=40, density=0.08)
    a = coupled_batch(inst, 5000, 2, threads=1)
    b = coupled_batch(inst, 5000, 2, threads=4)
    assert np.array_equal(a.rr_sir, b.rr_sir) and np.array_equal(a.rr_ic, b.rr_ic)


def test_dominance_report_diamond():
    rep = dominance_report(diamond(), [[0]], 1_000_000, 3)
    row = rep.rows[0]
    assert rep.violations == 0 and rep.coverage_failures == [0]
    assert within(row.ic.mean, DIAMOND_IC, row.ic.stderr)
    assert within(row.sir.mean, DIAMOND_SIR, row.sir.stderr)
    assert row.diff > 0
    assert within(row.diff, DIAMOND_IC - DIAMOND_SIR, row.joint_stderr)


def test_dominance_report_gamma_one():
    inst = make_instance(4, [(0, 1, 0.5), (0, 2, 0.5), (1, 3, 0.7), (2, 3, 0.4)], "sir", 1.0)
    row = dominance_report(inst, [[0]], 200_000, 4).rows[0]
    assert abs(row.diff) <= 3 * row.joint_stderr
