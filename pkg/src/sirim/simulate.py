"""Forward Monte-Carlo cascades and influence-spread estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._view import Stream, kernel_view, node_array, stream_seed
from .exact import brute_force_opt, exact_sigma  # noqa: F401  (re-exported)
from .graph import Instance, Model
from .streams import master64, run_chunked


@dataclass(frozen=True)
class CascadeOutcome:
    """Influenced nodes of one cascade (active, recovered, or infected by T)."""

    seeds: frozenset
    influenced: frozenset

    def __len__(self) -> int:
        return len(self.influenced)


@dataclass(frozen=True)
class SigmaEstimate:
    mean: float
    stderr: float
    runs: int

    def as_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "runs": self.runs}


def _run(inst: Instance, seeds, stream: Stream) -> CascadeOutcome:
    v = kernel_view(inst)
    s = node_array(inst, seeds)
    got = K.cascade_once(v.model, v.out_ptr, v.out_dst, v.out_eid, v.prob, v.gamma,
                         v.horizon, s, np.uint64(stream_seed(stream)))
    return CascadeOutcome(frozenset(s.tolist()), frozenset(got.tolist()))


def run_ic(inst: Instance, seeds, stream: Stream) -> CascadeOutcome:
    """One IC cascade; each newly active node gets one try per inactive out-neighbour."""
    inst.require(Model.IC)
    return _run(inst, seeds, stream)


def run_sir(inst: Instance, seeds, stream: Stream) -> CascadeOutcome:
    """One SIR epidemic run to extinction; returns every node that was ever infected.

    Each round, every infected node tries each susceptible out-neighbour
    (in adjacency order) and then recovers with probability ``gamma``.
    """
    inst.require(Model.SIR)
    return _run(inst, seeds, stream)


def run_tsir(inst: Instance, seeds, stream: Stream) -> CascadeOutcome:
    """SIR dynamics stopped after ``inst.horizon`` rounds; seeds count as infected at time 0."""
    inst.require(Model.TSIR)
    return _run(inst, seeds, stream)


def _batch(inst: Instance, seeds, runs: int, master_seed: int, threads=None):
    if int(runs) < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    v = kernel_view(inst)
    s = node_array(inst, seeds)
    master = master64(master_seed)

    def chunk(lo, hi):
        return K.cascade_chunk(v.model, v.out_ptr, v.out_dst, v.out_eid, v.prob, v.gamma,
                               v.horizon, s, master, lo, hi)

    parts = run_chunked(chunk, int(runs), threads=threads)
    counts = np.concatenate([p[0] for p in parts])
    tally = np.sum([p[1] for p in parts], axis=0) if parts else np.zeros(inst.n, np.int64)
    return counts, tally


def summarize(values) -> SigmaEstimate:
    """Mean and standard error (sample sd over sqrt(runs)) of per-run counts."""
    x = np.asarray(values, dtype=np.float64)
    runs = int(x.size)
    sd = float(x.std(ddof=1)) if runs > 1 else 0.0
    return SigmaEstimate(float(x.mean()), sd / math.sqrt(runs), runs)


def estimate_sigma(inst: Instance, seeds, runs: int, master_seed: int, threads=None) -> SigmaEstimate:
    """Monte-Carlo estimate of the expected influence of ``seeds``.

    Run ``i`` uses the stream derived from ``(master_seed, i)``, so the
    result is the same for any thread count.
    """
    counts, _ = _batch(inst, seeds, runs, master_seed, threads)
    return summarize(counts)


def influence_counts(inst: Instance, seeds, runs: int, master_seed: int, threads=None) -> np.ndarray:
    """Per-run influenced counts, in run order."""
    return _batch(inst, seeds, runs, master_seed, threads)[0]


def infection_frequencies(inst: Instance, seeds, runs: int, master_seed: int, threads=None) -> np.ndarray:
    """Fraction of runs in which each node ends up influenced."""
    return _batch(inst, seeds, runs, master_seed, threads)[1] / float(runs)
