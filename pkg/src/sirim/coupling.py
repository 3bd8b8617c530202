"""Paired IC/SIR reverse samples on shared randomness, and dominance reports.

Each revealed edge gets one uniform ``x``. The IC side marks the edge live
when ``x < p_e`` (the matched marginal); the SIR side when ``x`` is below
its conditional probability given the source's blocked edges so far, which
never exceeds ``p_e``. Any node joining the SIR set therefore also joins
the IC set in the same sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from ._view import Stream, kernel_view, stream_seed
from .graph import Instance, Model
from .simulate import SigmaEstimate, estimate_sigma
from .streams import master64, run_chunked, sub_master


@dataclass(frozen=True)
class CoupledOutcome:
    """One coupled sample.

    ``rr_ic``/``rr_sir`` are the partially revealed IC set and the SIR set;
    ``edges_ic``/``edges_sir`` the edges found live on each side;
    ``revealed`` the edges in reveal order. With ``full_reveal`` the
    remaining edges are drawn too and ``full_ic``/``full_sir`` hold the
    complete reverse-reachable sets of the two live-edge graphs.
    """

    root: int
    rr_ic: frozenset
    rr_sir: frozenset
    edges_ic: frozenset
    edges_sir: frozenset
    revealed: tuple
    full_ic: Optional[frozenset] = None
    full_sir: Optional[frozenset] = None

    @property
    def contained(self) -> bool:
        return self.rr_sir <= self.rr_ic


def _matched_p(inst: Instance) -> np.ndarray:
    return inst.matched_ic().params.edge_prob


def _chunk(v, p_ic, root, master, lo, hi):
    return K.couple_chunk(v.in_ptr, v.in_src, v.in_eid, v.prob, v.gamma, p_ic, root, master, lo, hi)


def coupled_rr(inst_sir: Instance, root: int, stream: Stream, full_reveal: bool = False) -> CoupledOutcome:
    """One coupled IC/SIR reverse sample from ``root``.

    ``full_reveal`` completes both live-edge graphs (test use only).
    """
    inst_sir.require(Model.SIR)
    root = inst_sir.check_nodes([root])[0]
    v = kernel_view(inst_sir)
    seed = stream_seed(stream)
    (roots, f2, n2, f1, n1, e1, ne1, e2, ne2, rev, nrev, bad) = _chunk(
        v, _matched_p(inst_sir), root, np.uint64(seed), 0, 1)
    out = CoupledOutcome(root, frozenset(f1.tolist()), frozenset(f2.tolist()),
                         frozenset(e1.tolist()), frozenset(e2.tolist()), tuple(rev.tolist()))
    if not full_reveal:
        return out
    rng = np.random.default_rng([seed, 0xF])
    full_ic, full_sir = _complete(inst_sir, out, rng)
    return CoupledOutcome(out.root, out.rr_ic, out.rr_sir, out.edges_ic, out.edges_sir,
                          out.revealed, frozenset(full_ic), frozenset(full_sir))


def _reverse_reach(g, root: int, live: np.ndarray) -> set:
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for w, e in g.in_adj(u):
            if live[e] and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _complete(inst: Instance, out: CoupledOutcome, rng: np.random.Generator):
    """Draw every unrevealed edge given the revealed outcomes.

    IC edges are independent, so unrevealed ones are fresh coins. For SIR,
    each node's pattern is redrawn from its recovery-round construction
    until it agrees with what was revealed (rejection sampling).
    """
    g = inst.graph
    p = _matched_p(inst)
    beta, gamma = inst.params.edge_prob, inst.gamma
    revealed = np.zeros(g.m, dtype=bool)
    revealed[list(out.revealed)] = True
    live1 = np.zeros(g.m, dtype=bool)
    live1[list(out.edges_ic)] = True
    fresh = ~revealed
    live1[fresh] = rng.random(int(fresh.sum())) < p[fresh]

    live2 = np.zeros(g.m, dtype=bool)
    for u in range(g.n):
        eids = g.out_eid[g.out_ptr[u]:g.out_ptr[u + 1]]
        if eids.size == 0:
            continue
        known = revealed[eids]
        want = np.isin(eids, list(out.edges_sir))
        for _ in range(1_000_000):
            rec = rng.geometric(gamma[u])
            first = rng.geometric(beta[eids])
            pattern = first <= rec
            if np.array_equal(pattern[known], want[known]):
                live2[eids] = pattern
                break
        else:
            raise RuntimeError(f"rejection sampling failed at node {u}")
    return _reverse_reach(g, out.root, live1), _reverse_reach(g, out.root, live2)


@dataclass
class CouplingStats:
    """Batch of coupled samples in flat form (see ``couple_chunk``)."""

    samples: int
    roots: np.ndarray
    rr_sir_ptr: np.ndarray
    rr_sir: np.ndarray
    rr_ic_ptr: np.ndarray
    rr_ic: np.ndarray
    revealed_counts: np.ndarray
    violations: int

    def sir_set(self, i: int) -> np.ndarray:
        return self.rr_sir[self.rr_sir_ptr[i]:self.rr_sir_ptr[i + 1]]

    def ic_set(self, i: int) -> np.ndarray:
        return self.rr_ic[self.rr_ic_ptr[i]:self.rr_ic_ptr[i + 1]]

    def member_frequency(self, n: int, side: str = "sir") -> np.ndarray:
        flat = self.rr_sir if side == "sir" else self.rr_ic
        return np.bincount(flat, minlength=n) / float(self.samples)

    def hits(self, seeds, side: str = "sir") -> np.ndarray:
        flat, ptr = (self.rr_sir, self.rr_sir_ptr) if side == "sir" else (self.rr_ic, self.rr_ic_ptr)
        inside = np.isin(flat, np.asarray(list(seeds), dtype=np.int64))
        counts = np.add.reduceat(inside.astype(np.int64), ptr[:-1]) if flat.size else np.zeros(0)
        return counts > 0


def _ptr(sizes: np.ndarray) -> np.ndarray:
    ptr = np.zeros(sizes.size + 1, np.int64)
    np.cumsum(sizes, out=ptr[1:])
    return ptr


def coupled_batch(inst_sir: Instance, samples: int, master_seed: int, root=None,
                  threads=None) -> CouplingStats:
    """``samples`` coupled draws; sample ``i`` uses the stream of ``(master_seed, i)``."""
    inst_sir.require(Model.SIR)
    if int(samples) < 1:
        raise ValueError("samples must be >= 1")
    fixed = -1 if root is None else inst_sir.check_nodes([root])[0]
    v = kernel_view(inst_sir)
    p_ic = _matched_p(inst_sir)
    master = master64(master_seed)
    parts = run_chunked(lambda lo, hi: _chunk(v, p_ic, fixed, master, lo, hi),
                        int(samples), threads=threads)
    cat = lambda j: np.concatenate([p[j] for p in parts])  # noqa: E731
    return CouplingStats(int(samples), cat(0), _ptr(cat(2)), cat(1), _ptr(cat(4)), cat(3),
                         cat(10), int(sum(p[11] for p in parts)))


@dataclass(frozen=True)
class DominanceRow:
    seeds: tuple
    ic: SigmaEstimate
    sir: SigmaEstimate

    @property
    def diff(self) -> float:
        return self.ic.mean - self.sir.mean

    @property
    def joint_stderr(self) -> float:
        return math.hypot(self.ic.stderr, self.sir.stderr)

    @property
    def ratio(self) -> float:
        return self.ic.mean / self.sir.mean if self.sir.mean > 0 else math.inf

    def dominates(self, z: float = 3.0) -> bool:
        """IC estimate at least the SIR estimate minus ``z`` joint standard errors."""
        return self.ic.mean >= self.sir.mean - z * self.joint_stderr

    def as_dict(self) -> dict:
        return {"seeds": list(self.seeds), "sigma_ic": self.ic.mean, "sigma_sir": self.sir.mean,
                "stderr_ic": self.ic.stderr, "stderr_sir": self.sir.stderr,
                "joint_stderr": self.joint_stderr, "diff": self.diff, "ratio": self.ratio,
                "runs": self.ic.runs}


@dataclass(frozen=True)
class DominanceReport:
    rows: list
    violations: int
    coupled_samples: int
    coverage_failures: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"rows": [r.as_dict() for r in self.rows], "violations": self.violations,
                "coupled_samples": self.coupled_samples,
                "coverage_failures": list(self.coverage_failures)}


def dominance_report(inst_sir: Instance, seed_sets, runs: int, master_seed: int,
                     coupled_samples: Optional[int] = None, threads=None) -> DominanceReport:
    """Compare IC and SIR spread of each seed set under matched parameters.

    The two models use independent sub-streams of ``master_seed``. Coupled
    RR samples (``min(runs, 100000)`` by default) count containment
    violations and, per seed set, samples where the seeds hit the SIR set
    but miss the IC set; both must be zero.
    """
    inst_sir.require(Model.SIR)
    ic = inst_sir.matched_ic()
    seed_sets = [tuple(sorted(set(inst_sir.check_nodes(s)))) for s in seed_sets]
    rows = []
    for j, s in enumerate(seed_sets):
        e_ic = estimate_sigma(ic, s, runs, sub_master(master_seed, 2 * j), threads)
        e_sir = estimate_sigma(inst_sir, s, runs, sub_master(master_seed, 2 * j + 1), threads)
        rows.append(DominanceRow(s, e_ic, e_sir))
    count = min(int(runs), 100_000) if coupled_samples is None else int(coupled_samples)
    stats = coupled_batch(inst_sir, count, sub_master(master_seed, 1 << 20), threads=threads)
    failures = [int((stats.hits(s, "sir") & ~stats.hits(s, "ic")).sum()) for s in seed_sets]
    return DominanceReport(rows, stats.violations, count, failures)


__all__ = ["CoupledOutcome", "CouplingStats", "DominanceReport", "DominanceRow",
           "coupled_batch", "coupled_rr", "dominance_report"]
