"""Exact influence spread by enumerating live-edge configurations.

Only nodes reachable from the seeds matter, so enumeration runs over their
out-edge outcomes. Each node contributes a table of distinct outcomes with
probabilities; the product over nodes is walked in vectorised chunks and
the reached set of each configuration is a 64-bit node mask.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .graph import Instance, InstanceError, Model
from .probability import MAX_JOINT_DEGREE, joint_outedge_distribution

MAX_NODES = 64
MAX_CONFIGS = 1 << 22
MAX_HORIZON = 16
MAX_SUBSETS = 10_000
_CHUNK = 1 << 15


def _ic_table(probs):
    """Outcome law of independent edges: (live bit patterns, probabilities)."""
    d = len(probs)
    masks = np.arange(1 << d)
    live = ((masks[:, None] >> np.arange(d)) & 1).astype(bool)
    p = np.asarray(probs)
    return masks, np.where(live, p, 1.0 - p).prod(axis=1)


def _tsir_table(betas, gamma, T):
    """Law of per-edge spans (0 = blocked) for one node under horizon ``T``.

    The recovery round only matters through ``L = min(R, T)``; given ``L``
    edges are independent with ``Pr[span = t] = beta (1-beta)^(t-1)`` for
    ``t <= L`` and blocked with the remaining mass.
    """
    d = len(betas)
    if T == 0:
        return [tuple([0] * d)], np.array([1.0])
    weights = [gamma * (1.0 - gamma) ** (r - 1) for r in range(1, T)]
    weights.append((1.0 - gamma) ** (T - 1))   # recovery at round >= T
    law: dict[tuple, float] = {}
    for L, w in enumerate(weights, start=1):
        per_edge = []
        for b in betas:
            opts = [(t, b * (1.0 - b) ** (t - 1)) for t in range(1, L + 1)]
            opts.append((0, (1.0 - b) ** L))
            per_edge.append([o for o in opts if o[1] > 0.0])
        for combo in itertools.product(*per_edge):
            spans = tuple(c[0] for c in combo)
            pr = w * math.prod(c[1] for c in combo)
            law[spans] = law.get(spans, 0.0) + pr
    keys = list(law)
    return keys, np.array([law[k] for k in keys])


def _node_outcomes(inst: Instance, u: int, local: dict):
    """Distinct outcomes of node ``u`` as (probabilities, masks).

    For IC/SIR ``masks`` has shape (k,) of reached-neighbour bitmasks; for
    TSIR shape (k, T+1) with column ``t`` the neighbours at span ``t``.
    """
    g = inst.graph
    lo, hi = g.out_ptr[u], g.out_ptr[u + 1]
    eids = g.out_eid[lo:hi]
    nbr_bits = [np.uint64(1) << np.uint64(local[v]) for v in g.out_dst[lo:hi].tolist()]
    probs = inst.params.edge_prob[eids]
    model = inst.model
    if model is Model.TSIR:
        T = inst.horizon
        keys, pr = _tsir_table(probs.tolist(), float(inst.gamma[u]), T)
        merged: dict[tuple, float] = {}
        for spans, p in zip(keys, pr):
            cols = [0] * (T + 1)
            for bit, t in zip(nbr_bits, spans):
                if t:
                    cols[t] |= int(bit)
            merged[tuple(cols)] = merged.get(tuple(cols), 0.0) + p
    else:
        if model is Model.IC or inst.gamma[u] >= 1.0:
            # a node recovering after one round tries each edge once, independently
            patterns, pr = _ic_table(probs)
        else:
            if len(eids) > MAX_JOINT_DEGREE:
                raise InstanceError(
                    f"node {u} has out-degree {len(eids)} > {MAX_JOINT_DEGREE}; too large for exact SIR")
            dist = joint_outedge_distribution(probs.tolist(), float(inst.gamma[u]))
            patterns, pr = np.arange(dist.probs.size), dist.probs
        merged = {}
        for pat, p in zip(patterns.tolist(), pr.tolist()):
            mask = 0
            for i, bit in enumerate(nbr_bits):
                if (pat >> i) & 1:
                    mask |= int(bit)
            merged[(mask,)] = merged.get((mask,), 0.0) + p
    keep = [(k, p) for k, p in merged.items() if p > 0.0]
    pr = np.array([p for _, p in keep])
    masks = np.array([k for k, _ in keep], dtype=np.uint64)
    if masks.shape[1] == 1:
        masks = masks[:, 0]
    return pr, masks


def _reached(model, T, seed_mask, nodes, cols):
    """Reached masks for a chunk; ``cols[j]`` are node ``j``'s outcome masks."""
    one = np.uint64(1)
    size = cols[0].shape[0] if cols else 1
    if model is not Model.TSIR:
        reach = np.full(size, seed_mask, dtype=np.uint64)
        while True:
            nxt = reach.copy()
            for j, u in enumerate(nodes):
                hit = ((reach >> np.uint64(u)) & one).astype(bool)
                nxt |= np.where(hit, cols[j], np.uint64(0))
            if np.array_equal(nxt, reach):
                return reach
            reach = nxt
    within = [np.full(size, seed_mask, dtype=np.uint64)]
    for t in range(1, T + 1):
        cur = within[t - 1].copy()
        for s in range(1, t + 1):
            base = within[t - s]
            for j, u in enumerate(nodes):
                hit = ((base >> np.uint64(u)) & one).astype(bool)
                cur |= np.where(hit, cols[j][:, s], np.uint64(0))
        within.append(cur)
    return within[T]


def _prepared(inst: Instance, sources: list[int]):
    g = inst.graph
    region = sorted(g.reachable_from(sources))
    if len(region) > MAX_NODES:
        raise InstanceError(
            f"{len(region)} nodes reachable from the seeds; exact enumeration supports {MAX_NODES}")
    if inst.model is Model.TSIR and inst.horizon > MAX_HORIZON:
        raise InstanceError(f"exact TSIR enumeration needs T <= {MAX_HORIZON}")
    local = {v: i for i, v in enumerate(region)}
    nodes, tables = [], []
    configs = 1
    for v in region:
        if g.out_ptr[v] == g.out_ptr[v + 1]:
            continue
        pr, masks = _node_outcomes(inst, v, local)
        if pr.size == 1 and not masks.any():
            continue
        configs *= pr.size
        if configs > MAX_CONFIGS:
            raise InstanceError(
                f"more than {MAX_CONFIGS} live-edge configurations; too large for exact enumeration")
        nodes.append(local[v])
        tables.append((pr, masks))
    seed_mask = 0
    for s in sources:
        seed_mask |= 1 << local[s]
    return np.uint64(seed_mask), nodes, tables, configs


def _enumerate_live(inst: Instance, sources: list[int]) -> float:
    seed_mask, nodes, tables, configs = _prepared(inst, sources)
    radix = [t[0].size for t in tables]
    total = 0.0
    for lo in range(0, configs, _CHUNK):
        idx = np.arange(lo, min(configs, lo + _CHUNK), dtype=np.int64)
        prob = np.ones(idx.size)
        cols = []
        for (pr, masks), r in zip(tables, radix):
            digit = idx % r
            idx = idx // r
            prob *= pr[digit]
            cols.append(masks[digit])
        reach = _reached(inst.model, inst.horizon, seed_mask, nodes, cols)
        total += float(prob @ np.bitwise_count(reach).astype(np.float64))
    return total


MAX_CHAIN_NODES = 12


def _forward_chain(inst: Instance, sources: list[int], tol: float = 1e-14) -> float:
    """Exact forward dynamics as a Markov chain on (infected, recovered) masks.

    Within a round every susceptible node with an infected in-neighbour is
    infected independently with ``1 - prod(1 - beta)``, and every infected
    node then recovers with its ``gamma``; branching one node at a time keeps
    the state dictionary small. IC is the ``gamma = 1`` case. Without a
    horizon the chain runs until the mass of states with infected nodes is
    below ``tol``.
    """
    g = inst.graph
    region = sorted(g.reachable_from(sources))
    if len(region) > MAX_CHAIN_NODES:
        raise InstanceError(
            f"{len(region)} nodes reachable from the seeds; the forward chain supports {MAX_CHAIN_NODES}")
    local = {v: i for i, v in enumerate(region)}
    k = len(region)
    fail = np.ones((k, k))   # fail[u, v] = 1 - prob of edge u -> v
    for e in range(g.m):
        u, v = int(g.src[e]), int(g.dst[e])
        if u in local and v in local:
            fail[local[u], local[v]] = 1.0 - inst.params.edge_prob[e]
    gamma = np.array([1.0 if inst.model is Model.IC else float(inst.gamma[v]) for v in region])
    seed_mask = sum(1 << local[s] for s in sources)
    states = {(seed_mask, 0): 1.0}
    done = 0.0   # expected influenced count from absorbed states
    rounds = 0
    horizon = inst.horizon if inst.model is Model.TSIR else None
    while states and (horizon is None or rounds < horizon):
        rounds += 1
        nxt: dict = {}
        for (inf, rec), pr in states.items():
            branch = {(0, 0): pr}
            for v in range(k):
                bit = 1 << v
                if inf & bit:
                    p = gamma[v]
                    branch = _split(branch, p, lambda a, b, bit=bit: (a, b | bit))
                elif not rec & bit:
                    miss = 1.0
                    for u in range(k):
                        if inf >> u & 1:
                            miss *= fail[u, v]
                    p = 1.0 - miss
                    if p > 0.0:
                        branch = _split(branch, p, lambda a, b, bit=bit: (a | bit, b))
            for (new_inf, new_rec), q in branch.items():
                key = ((inf & ~new_rec) | new_inf, rec | new_rec)
                nxt[key] = nxt.get(key, 0.0) + q
        states = {}
        for (inf, rec), pr in nxt.items():
            if inf:
                states[(inf, rec)] = pr
            else:
                done += pr * bin(rec).count("1")
        if horizon is None and sum(states.values()) < tol:
            break
    return float(done + sum(pr * bin(inf | rec).count("1") for (inf, rec), pr in states.items()))


def _split(branch: dict, p: float, move) -> dict:
    out: dict = {}
    for key, q in branch.items():
        if p < 1.0:
            out[key] = out.get(key, 0.0) + q * (1.0 - p)
        hit = move(*key)
        out[hit] = out.get(hit, 0.0) + q * p
    return out


def exact_sigma(inst: Instance, seeds, method: str = "auto") -> float:
    """Expected number of influenced nodes, computed exactly.

    ``method="live_edge"`` enumerates live-edge configurations (IC/SIR and
    small TSIR); ``"chain"`` runs the forward dynamics as a Markov chain over
    node states. ``"auto"`` uses the chain for TSIR and live edges otherwise.
    Raises :class:`InstanceError` when the instance is beyond the chosen
    method's limits (64 reachable nodes and ``2**22`` configurations for live
    edges, SIR out-degree 12, TSIR horizon 16; 12 reachable nodes for the chain).
    """
    sources = sorted(set(inst.check_nodes(seeds)))
    if not sources:
        return 0.0
    if method == "auto":
        method = "chain" if inst.model is Model.TSIR else "live_edge"
    if method == "chain":
        return _forward_chain(inst, sources)
    if method != "live_edge":
        raise ValueError(f"unknown method {method!r}")
    return _enumerate_live(inst, sources)


def brute_force_opt(inst: Instance, k: int) -> tuple[tuple[int, ...], float]:
    """Best ``k``-subset by exact spread; ties go to the lexicographically first."""
    if not 1 <= k <= inst.n:
        raise ValueError(f"k must lie in [1, n={inst.n}], got {k}")
    if math.comb(inst.n, k) > MAX_SUBSETS:
        raise InstanceError(f"C({inst.n}, {k}) exceeds {MAX_SUBSETS} subsets")
    best, best_val = None, -1.0
    for combo in itertools.combinations(range(inst.n), k):
        val = exact_sigma(inst, combo)
        if best is None or val > best_val + 1e-12 * max(1.0, best_val):
            best, best_val = combo, val
    return best, best_val
