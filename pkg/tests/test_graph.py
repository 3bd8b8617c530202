import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sirim import (DirectedGraph, ErdosRenyi, Fig1Gadget, Fig2Gadget, InstanceError,
                   InstanceFormatError, Model, Path, Star, generate, make_instance,
                   parse_instance, serialize_instance)
from sirim.probability import aggregate_edge_prob


def edge_lists(max_n=12):
    return st.integers(2, max_n).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=40)
            .map(lambda es: list(dict.fromkeys((a, b) for a, b in es if a != b)))))


@given(edge_lists())
def test_in_adj_is_transpose_of_out_adj(case):
    n, edges = case
    g = DirectedGraph(n, [a for a, _ in edges], [b for _, b in edges])
    out = {(u, v, e) for u in range(n) for v, e in g.out_adj(u)}
    inn = {(u, v, e) for v in range(n) for u, e in g.in_adj(v)}
    assert out == inn == {(a, b, e) for e, (a, b) in enumerate(edges)}
    for u in range(n):
        ids = [e for _, e in g.out_adj(u)]
        assert ids == sorted(ids)


def test_graph_rejects_bad_edges():
    with pytest.raises(InstanceError, match="self-loop"):
        DirectedGraph(3, [0, 1], [1, 1])
    with pytest.raises(InstanceError, match="duplicate edge 0 -> 1 at edge 2"):
        DirectedGraph(3, [0, 1, 0], [1, 2, 1])
    with pytest.raises(InstanceError, match="out of range"):
        DirectedGraph(2, [0], [2])


def test_parse_examples():
    inst = parse_instance("n 2\nmodel ic\nedge 0 1 0.5\n")
    assert (inst.n, inst.m, inst.model) == (2, 1, Model.IC)
    assert inst.params.edge_prob.tolist() == [0.5]

    chain = parse_instance("n 3\nmodel tsir\nT 2\ngamma_default 0.5\nedge 0 1 1.0\nedge 1 2 1.0\n")
    assert chain.horizon == 2 and chain.gamma.tolist() == [0.5] * 3
    assert chain.graph.out_adj(0) == [(1, 0)] and chain.graph.out_adj(1) == [(2, 1)]


@pytest.mark.parametrize("text, line, msg", [
    ("n 2\nmodel sir\ngamma_default 0\nedge 0 1 0.5\n", 3, "gamma must lie in"),
    ("n 2\nmodel ic\nedge 0 1 0.5\nedge 0 1 0.2\n", 4, "duplicate edge"),
    ("n 2\nmodel ic\nedge 1 1 0.5\n", 3, "self-loop"),
    ("n 2\nmodel ic\nedge 0 2 0.5\n", 3, "out of range"),
    ("n 2\nmodel ic\nedge 0 1 1.5\n", 3, "p must lie"),
    ("n 2\nmodel sir\ngamma_default 0.5\nedge 0 1 0\n", 4, "beta must lie"),
    ("n 2\nmodel tsir\ngamma_default 0.5\n", 0, "need 'T"),
    ("n 2\nmodel ic\nT 3\n", 3, "T only applies"),
    ("model ic\nn 2\n", 1, "first directive"),
    ("n 2\nmodel ic\nedge 0 x 0.5\n", 3, "integer"),
    ("n 2\nmodel ic\nfoo 1\n", 3, "unknown directive"),
    ("n 2\nmodel sir\ngamma 0 0.5\nedge 0 1 0.5\n", 0, "node 1 has no gamma"),
])
def test_parse_errors_carry_line_numbers(text, line, msg):
    with pytest.raises(InstanceFormatError, match=msg) as info:
        parse_instance(text)
    assert info.value.lineno == line


def test_parse_accepts_scientific_notation_and_comments():
    inst = parse_instance("# header\nn 2  # two nodes\nmodel sir\ngamma_default 5e-1\n"
                          "edge 0 1 1E-3\n")
    assert inst.params.edge_prob[0] == 1e-3 and inst.gamma[0] == 0.5


def test_roundtrip_small_and_generated():
    small = parse_instance("n 2\nmodel ic\nedge 0 1 0.5\n")
    assert parse_instance(serialize_instance(small)) == small
    rng = np.random.default_rng(5)
    big = generate(ErdosRenyi(100, 0.05, (1e-3, 1.0), (0.05, 1.0), "tsir", horizon=7), rng)
    back = parse_instance(serialize_instance(big))
    assert back == big
    assert all(back.graph.out_adj(u) == big.graph.out_adj(u) for u in range(big.n))


@settings(max_examples=50)
@given(st.lists(st.floats(min_value=1e-300, max_value=1.0), min_size=1, max_size=6),
       st.floats(min_value=1e-9, max_value=1.0))
def test_roundtrip_is_bit_exact(betas, gamma):
    edges = [(0, i + 1, b) for i, b in enumerate(betas)]
    inst = make_instance(len(betas) + 1, edges, "sir", gamma)
    back = parse_instance(serialize_instance(inst))
    assert back == inst
    assert back.params.edge_prob.tobytes() == inst.params.edge_prob.tobytes()


def test_fig1_gadget_structure():
    inst = generate(Fig1Gadget(b=3, n0=5, beta=0.5, gamma=0.5), None)
    assert (inst.n, inst.m) == (10, 11)
    solid = int(np.sum(inst.params.edge_prob == 1.0))
    assert solid == 3 + 5
    ic = generate(Fig1Gadget(b=3, n0=5, beta=0.5, gamma=0.5, model="ic"), None)
    p = aggregate_edge_prob(0.5, 0.5)
    assert sorted(ic.params.edge_prob.tolist()) == [p] * 3 + [1.0] * 8


def test_fig2_gadget_shares_seed_vertex():
    spec = Fig2Gadget(star_leaves=4, gadget_copies=3, b=2, n0=1, beta=0.3, gamma=0.4,
                      left_edge_prob=0.7)
    inst = generate(spec, None)
    assert inst.n == 1 + 4 + 1 + 3 * (2 + 1 + 1)
    assert inst.m == 4 + 3 * (2 + 2 + 1)
    v = spec.v
    assert len(inst.graph.out_adj(v)) == 6
    assert inst.gamma[0] == 1.0
    # gadget copies meet only at v
    reach = [set(inst.graph.reachable_from([w])) - {w} for w, _ in inst.graph.out_adj(v)]
    groups = {frozenset(r) for r in reach}
    assert len(groups) == 3
    a, b, c = groups
    assert not (a & b) and not (b & c) and not (a & c)


def test_star_and_path():
    star = generate(Star(leaves=5), None)
    assert (star.n, star.m) == (6, 5)
    assert [v for v, _ in star.graph.out_adj(0)] == [1, 2, 3, 4, 5]
    path = generate(Path(length=3, prob=0.5, gamma=0.5, model="sir"), None)
    assert (path.n, path.m) == (4, 3)


def test_erdos_renyi_edge_count_and_determinism():
    counts = [generate(ErdosRenyi(100, 0.05, 0.1, (0.2, 1.0)), np.random.default_rng(s)).m
              for s in range(200)]
    mean, expected = np.mean(counts), 100 * 99 * 0.05
    sd = np.sqrt(100 * 99 * 0.05 * 0.95)
    assert abs(mean - expected) <= 4 * sd / np.sqrt(len(counts))
    a = generate(ErdosRenyi(100, 0.05, 0.1, (0.2, 1.0)), np.random.default_rng(9))
    b = generate(ErdosRenyi(100, 0.05, 0.1, (0.2, 1.0)), np.random.default_rng(9))
    assert a == b
    assert np.all((a.gamma > 0) & (a.gamma <= 1))


def test_generator_rejects_bad_parameters():
    with pytest.raises(InstanceError):
        generate(Fig1Gadget(b=0, n0=1, beta=0.5, gamma=0.5), None)
    with pytest.raises(InstanceError):
        generate(Fig1Gadget(b=2, n0=1, beta=0.5, gamma=0.0), None)
    with pytest.raises(InstanceError):
        generate(Star(leaves=3, prob=0.5, gamma=0.5, model="sir"), None).with_model("ic")


def test_instance_validation():
    with pytest.raises(InstanceError, match="need gamma"):
        make_instance(2, [(0, 1, 0.5)], "sir")
    with pytest.raises(InstanceError, match="horizon"):
        make_instance(2, [(0, 1, 0.5)], "tsir", 0.5)
    with pytest.raises(InstanceError, match="beta"):
        make_instance(2, [(0, 1, 0.0)], "sir", 0.5)
    ic = make_instance(2, [(0, 1, 0.0)], "ic")
    assert ic.params.edge_prob[0] == 0.0
