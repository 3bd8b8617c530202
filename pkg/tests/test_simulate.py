import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import within
from instances import DIAMOND_IC, DIAMOND_SIR, diamond, oracle_instances, small_sir
from sirim import InstanceError, Star, generate, make_instance
from sirim.exact import brute_force_opt, exact_sigma
from sirim.simulate import (estimate_sigma, infection_frequencies, influence_counts, run_ic,
                            run_sir, run_tsir)

CHAIN = [(0, 1, 1.0), (1, 2, 1.0)]


def test_exact_examples():
    edge = make_instance(2, [(0, 1, 0.5)], "ic")
    assert exact_sigma(edge, [0]) == 1.5
    assert exact_sigma(edge, []) == 0.0
    assert exact_sigma(diamond("sir"), [0]) == pytest.approx(DIAMOND_SIR, abs=1e-11)
    assert exact_sigma(diamond("ic"), [0]) == pytest.approx(DIAMOND_IC, abs=1e-12)
    # two rounds: Pr[1] = Pr[2] = 1/2 + 1/8, Pr[3] = 3/4
    assert exact_sigma(diamond("tsir", 2), [0]) == pytest.approx(3.0, abs=1e-12)
    # one round: a single attempt per edge
    assert exact_sigma(diamond("tsir", 1), [0]) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("model", ["ic", "sir"])
def test_exact_oracles_agree(model):
    for inst in oracle_instances(model):
        for seeds in ([0], [1, 3], list(range(inst.n))):
            a = exact_sigma(inst, seeds, method="live_edge")
            b = exact_sigma(inst, seeds, method="chain")
            assert a == pytest.approx(b, abs=1e-10)


def test_exact_tsir_oracles_agree_on_diamond():
    for T in (1, 2, 3):
        inst = diamond("tsir", T)
        assert exact_sigma(inst, [0], method="live_edge") == pytest.approx(
            exact_sigma(inst, [0], method="chain"), abs=1e-10)


def test_exact_rejects_large():
    big = generate(Star(leaves=80), None)
    with pytest.raises(ValueError):
        exact_sigma(big, [0])


def test_brute_force_examples():
    assert brute_force_opt(make_instance(2, [(0, 1, 0.5)], "ic"), 1) == ((0,), 1.5)
    assert brute_force_opt(make_instance(2, [], "ic"), 1) == ((0,), 1.0)
    star = generate(Star(leaves=5), None)
    assert brute_force_opt(star, 1) == ((0,), 6.0)


def test_run_examples():
    edge = make_instance(2, [(0, 1, 0.5)], "ic")
    assert len(run_ic(edge, [], 1)) == 0
    det = make_instance(4, [(0, 1, 1.0), (1, 2, 1.0), (3, 0, 1.0)], "ic")
    assert run_ic(det, [0], 3).influenced == {0, 1, 2}
    sir = make_instance(4, [(0, 1, 1.0), (1, 2, 1.0), (3, 0, 1.0)], "sir", 0.3)
    assert run_sir(sir, [0], 3).influenced == {0, 1, 2}
    chain = make_instance(3, CHAIN, "tsir", 1.0, horizon=1)
    for s in range(20):
        assert run_tsir(chain, [0], s).influenced == {0, 1}
    assert run_tsir(chain.with_model("tsir", 0), [0, 2], 5).influenced == {0, 2}


def test_model_mismatch_and_bad_seeds():
    ic = make_instance(2, [(0, 1, 0.5)], "ic")
    with pytest.raises(InstanceError):
        run_sir(ic, [0], 1)
    with pytest.raises(ValueError):
        run_ic(ic, [2], 1)
    with pytest.raises(ValueError):
        estimate_sigma(ic, [0], 0, 1)


def test_single_edge_mean():
    est = estimate_sigma(make_instance(2, [(0, 1, 0.5)], "ic"), [0], 100_000, 1)
    assert within(est.mean, 1.5, est.stderr, 3)


def test_fork_mean():
    fork = make_instance(3, [(0, 1, 0.5), (0, 2, 0.5)], "sir", 0.5)
    est = estimate_sigma(fork, [0], 100_000, 2)
    assert within(est.mean, 7 / 3, est.stderr, 3)


def test_all_seeds():
    inst = small_sir(3)
    est = estimate_sigma(inst, range(inst.n), 100, 0)
    assert est.mean == inst.n and est.stderr == 0.0


@pytest.mark.parametrize("model", ["ic", "sir", "tsir"])
def test_estimates_match_exact(model):
    for j, inst in enumerate(oracle_instances(model)):
        exact = exact_sigma(inst, [0])
        est = estimate_sigma(inst, [0], 100_000, 40 + j)
        assert within(est.mean, exact, est.stderr), (j, est, exact)


def test_thread_count_invariance():
    inst = small_sir(5, n=40, density=0.1)
    a = estimate_sigma(inst, [0, 1], 10_000, 9, threads=1)
    b = estimate_sigma(inst, [0, 1], 10_000, 9, threads=4)
    assert a == b
    assert np.array_equal(influence_counts(inst, [0], 5000, 3, threads=1),
                          influence_counts(inst, [0], 5000, 3, threads=3))


def test_stderr_definition():
    inst = small_sir(5, n=20, density=0.15)
    counts = influence_counts(inst, [0], 3000, 4)
    est = estimate_sigma(inst, [0], 3000, 4)
    assert est.mean == pytest.approx(counts.mean())
    assert est.stderr == pytest.approx(counts.std(ddof=1) / np.sqrt(3000))
    assert 1 <= est.mean <= inst.n


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 2 ** 32))
def test_influenced_within_reachable_closure(inst_seed, stream):
    inst = small_sir(inst_seed, n=12, density=0.2)
    for model in ("sir", "ic", "tsir"):
        m = inst if model == "sir" else inst.matched_ic() if model == "ic" else inst.with_model("tsir", 3)
        run = {"sir": run_sir, "ic": run_ic, "tsir": run_tsir}[model]
        out = run(m, [0], stream)
        assert 0 in out.influenced
        assert out.influenced <= inst.graph.reachable_from([0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 2 ** 32))
def test_tsir_monotone_in_horizon(inst_seed, stream):
    inst = small_sir(inst_seed, n=12, density=0.25)
    prev = None
    for T in range(0, 8):
        cur = run_tsir(inst.with_model("tsir", T), [0], stream).influenced
        if prev is not None:
            assert prev <= cur
        prev = cur
    assert run_tsir(inst.with_model("tsir", 0), [0], stream).influenced == {0}


def test_gamma_one_matches_ic_frequencies():
    inst = small_sir(8, n=8, density=0.3)
    sir = make_instance(inst.n, [(int(a), int(b), float(p)) for a, b, p in zip(
        inst.graph.src, inst.graph.dst, inst.params.edge_prob)], "sir", 1.0)
    f_sir = infection_frequencies(sir, [0], 100_000, 1)
    f_ic = infection_frequencies(sir.matched_ic(), [0], 100_000, 2)
    se = np.sqrt(np.maximum(f_ic * (1 - f_ic), 1e-12) * 2 / 100_000)
    assert np.all(np.abs(f_sir - f_ic) <= 4 * se + 1e-12)
