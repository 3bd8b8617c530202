"""Random live-edge graphs whose reachability reproduces the cascades.

For SIR a node's out-edges are coupled through its recovery round ``R``:
edge ``e`` is live iff its first success round is ``<= R``. For TSIR the
same holds with ``R`` capped at the horizon, and a live edge carries its
success round as an integer span.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from ._view import Stream, kernel_view, node_array, stream_seed
from .graph import Instance, Model
from .streams import master64, run_chunked


@dataclass(frozen=True)
class LiveEdgeGraph:
    """Live edge ids, plus per-edge spans for TSIR (``None`` otherwise)."""

    live: frozenset
    span: Optional[dict] = None

    def reachable(self, inst: Instance, seeds) -> set:
        """Nodes reachable from ``seeds``; for TSIR, within total span ``T``."""
        g = inst.graph
        dist = {s: 0 for s in inst.check_nodes(seeds)}
        bound = inst.horizon if self.span is not None else None
        frontier = sorted(dist)
        # label-correcting search; graphs here are small test instances
        while frontier:
            nxt = []
            for u in frontier:
                for v, e in g.out_adj(u):
                    if e not in self.live:
                        continue
                    d = dist[u] + (self.span[e] if self.span is not None else 0)
                    if bound is not None and d > bound:
                        continue
                    if v not in dist or d < dist[v]:
                        dist[v] = d
                        nxt.append(v)
            frontier = nxt
        return set(dist)


def _sample(inst: Instance, stream: Stream, literal: bool) -> LiveEdgeGraph:
    v = kernel_view(inst)
    span = K.live_once(v.model, v.out_ptr, v.out_eid, v.prob, v.gamma, v.horizon,
                       bool(literal), np.uint64(stream_seed(stream)))
    live = np.flatnonzero(span)
    spans = {int(e): int(span[e]) for e in live} if inst.model is Model.TSIR else None
    return LiveEdgeGraph(frozenset(live.tolist()), spans)


def sample_live_ic(inst: Instance, stream: Stream) -> LiveEdgeGraph:
    """Each edge live independently with probability ``p_e``."""
    inst.require(Model.IC)
    return _sample(inst, stream, False)


def sample_live_sir(inst: Instance, stream: Stream) -> LiveEdgeGraph:
    """Per node: draw the recovery round, then each out-edge's first success round."""
    inst.require(Model.SIR)
    return _sample(inst, stream, False)


def sample_live_tsir(inst: Instance, stream: Stream, literal: bool = False) -> LiveEdgeGraph:
    """Live edges with spans ``t <= min(R, T)``.

    ``literal=True`` flips one coin per round instead of inverting the
    geometric law; both give the same distribution.
    """
    inst.require(Model.TSIR)
    return _sample(inst, stream, literal)


@dataclass(frozen=True)
class LiveEdgeStats:
    """Aggregates over ``samples`` live-edge graphs.

    ``edge_live`` counts per edge; ``reach`` holds the number of nodes
    reachable (T-reachable for TSIR) from the seeds in each sample;
    ``patterns`` holds the probe node's live pattern per sample.
    """

    samples: int
    edge_live: np.ndarray
    reach: np.ndarray
    patterns: np.ndarray


def live_edge_stats(inst: Instance, samples: int, master_seed: int, seeds=(), probe: int = -1,
                    literal: bool = False, threads=None) -> LiveEdgeStats:
    if int(samples) < 1:
        raise ValueError("samples must be >= 1")
    v = kernel_view(inst)
    s = node_array(inst, seeds)
    if probe >= 0:
        inst.check_nodes([probe])
        if inst.graph.out_ptr[probe + 1] - inst.graph.out_ptr[probe] > 62:
            raise ValueError("probe node has too many out-edges for a pattern code")
    master = master64(master_seed)

    def chunk(lo, hi):
        return K.live_chunk(v.model, v.out_ptr, v.out_dst, v.out_eid, v.prob, v.gamma,
                            v.horizon, bool(literal), s, int(probe), master, lo, hi)

    parts = run_chunked(chunk, int(samples), threads=threads)
    return LiveEdgeStats(int(samples), np.sum([p[0] for p in parts], axis=0),
                         np.concatenate([p[1] for p in parts]),
                         np.concatenate([p[2] for p in parts]))
