"""Reverse-reachable (RR) sets and indexed collections of them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._view import Stream, kernel_view, stream_seed
from .graph import Instance, Model
from .streams import CHUNK, master64, run_chunked


@dataclass(frozen=True)
class RRSet:
    """Nodes that reach ``root`` in one sampled realization.

    ``work`` counts the in-edges examined while sampling.
    """

    root: int
    members: frozenset
    work: int


def _one(inst: Instance, stream: Stream, root, literal=False) -> RRSet:
    v = kernel_view(inst)
    fixed = -1 if root is None else inst.check_nodes([root])[0]
    seed = stream_seed(stream)
    # a single-sample chunk: index 0 under a master equal to the drawn seed
    members, sizes, roots, works = K.rr_chunk(
        v.model, v.in_ptr, v.in_src, v.in_eid, v.prob, v.gamma, v.horizon, bool(literal),
        fixed, np.uint64(seed), 0, 1)
    return RRSet(int(roots[0]), frozenset(members.tolist()), int(works[0]))


def sample_rr_ic(inst: Instance, stream: Stream, root=None) -> RRSet:
    """Reverse BFS from a uniform root, one coin per revealed in-edge."""
    inst.require(Model.IC)
    return _one(inst, stream, root)


def sample_rr_sir(inst: Instance, stream: Stream, root=None) -> RRSet:
    """Reverse sampling with conditionals on each candidate's blocked out-edges.

    The smallest-id candidate is revealed first, its edges into the set in
    index order. A candidate joins at its first live edge; blocked edges
    lower the live probability of its later edges within the same sample.
    """
    inst.require(Model.SIR)
    return _one(inst, stream, root)


def sample_rr_tsir(inst: Instance, stream: Stream, root=None, literal: bool = False) -> RRSet:
    """Reverse exploration recording spans, pruned to span-distance ``<= T``.

    ``literal=True`` draws recovery and success rounds one coin per round.
    """
    inst.require(Model.TSIR)
    return _one(inst, stream, root, literal)


class RRCollection:
    """Growable list of RR sets with a node -> set-index inverted index.

    Set ``i`` is always drawn from the stream derived from ``(master_seed,
    i)``, so growing a collection from 100 to 200 sets gives the same sets
    as building 200 directly.
    """

    def __init__(self, inst: Instance, master_seed: int, fixed_root=None, literal=False, threads=None):
        self.inst = inst
        self.n = inst.n if inst is not None else 0
        self.master_seed = int(master_seed)
        self.fixed_root = -1 if fixed_root is None else inst.check_nodes([fixed_root])[0]
        self.literal = bool(literal)
        self.threads = threads
        self._members: list[np.ndarray] = []
        self._sizes: list[np.ndarray] = []
        self._roots: list[np.ndarray] = []
        self._works: list[np.ndarray] = []
        self._count = 0
        self._index = None

    @classmethod
    def from_sets(cls, sets, n: int) -> "RRCollection":
        """Collection over explicit member sets (roots taken as each set's minimum)."""
        coll = cls.__new__(cls)
        coll.inst, coll.n, coll.master_seed = None, int(n), 0
        coll.fixed_root, coll.literal, coll.threads = -1, False, None
        sets = [sorted(set(int(x) for x in s)) for s in sets]
        if any(not s for s in sets):
            raise ValueError("RR sets are never empty")
        if any(x < 0 or x >= n for s in sets for x in s):
            raise ValueError(f"member out of range [0, {n})")
        coll._members = [np.array([x for s in sets for x in s], dtype=np.int32)]
        coll._sizes = [np.array([len(s) for s in sets], dtype=np.int64)]
        coll._roots = [np.array([s[0] for s in sets], dtype=np.int64)]
        coll._works = [np.zeros(len(sets), dtype=np.int64)]
        coll._count = len(sets)
        coll._index = None
        return coll

    def __len__(self) -> int:
        return self._count

    def extend_to(self, count: int) -> "RRCollection":
        count = int(count)
        if count <= self._count:
            return self
        v = kernel_view(self.inst)
        master = master64(self.master_seed)

        def chunk(lo, hi):
            return K.rr_chunk(v.model, v.in_ptr, v.in_src, v.in_eid, v.prob, v.gamma, v.horizon,
                              self.literal, self.fixed_root, master, lo, hi)

        # chunk boundaries stay aligned to CHUNK multiples whatever the growth steps
        start = self._count
        bounds = []
        lo = start
        while lo < count:
            hi = min(count, (lo // CHUNK + 1) * CHUNK)
            bounds.append((lo, hi))
            lo = hi
        parts = run_chunked(lambda a, b: chunk(*bounds[a]), len(bounds), chunk=1,
                            threads=self.threads)
        for members, sizes, roots, works in parts:
            self._members.append(members)
            self._sizes.append(sizes)
            self._roots.append(roots)
            self._works.append(works)
        self._count = count
        self._index = None
        return self

    def _flat(self):
        if self._index is None:
            members = np.concatenate(self._members) if self._members else np.zeros(0, np.int32)
            sizes = np.concatenate(self._sizes) if self._sizes else np.zeros(0, np.int64)
            set_ptr = np.zeros(sizes.size + 1, np.int64)
            np.cumsum(sizes, out=set_ptr[1:])
            set_id = np.repeat(np.arange(sizes.size, dtype=np.int64), sizes)
            order = np.argsort(members, kind="stable")
            node_ptr = np.zeros(self.n + 1, np.int64)
            np.cumsum(np.bincount(members, minlength=self.n), out=node_ptr[1:])
            self._members = [members]
            self._sizes = [sizes]
            self._roots = [np.concatenate(self._roots)] if self._roots else []
            self._works = [np.concatenate(self._works)] if self._works else []
            self._index = (set_ptr, members.astype(np.int64), node_ptr, set_id[order])
        return self._index

    @property
    def set_ptr(self) -> np.ndarray:
        return self._flat()[0]

    @property
    def set_members(self) -> np.ndarray:
        return self._flat()[1]

    @property
    def node_ptr(self) -> np.ndarray:
        return self._flat()[2]

    @property
    def node_sets(self) -> np.ndarray:
        """Concatenated per-node lists of set indices, sliced by ``node_ptr``."""
        return self._flat()[3]

    @property
    def roots(self) -> np.ndarray:
        self._flat()
        return self._roots[0] if self._roots else np.zeros(0, np.int64)

    @property
    def works(self) -> np.ndarray:
        self._flat()
        return self._works[0] if self._works else np.zeros(0, np.int64)

    @property
    def total_work(self) -> int:
        return int(self.works.sum())

    def sets_containing(self, node: int) -> np.ndarray:
        ptr, sets = self.node_ptr, self.node_sets
        return sets[ptr[node]:ptr[node + 1]]

    def __getitem__(self, i: int) -> RRSet:
        ptr, members = self.set_ptr, self.set_members
        if not -self._count <= i < self._count:
            raise IndexError(i)
        i %= self._count
        return RRSet(int(self.roots[i]), frozenset(members[ptr[i]:ptr[i + 1]].tolist()),
                     int(self.works[i]))

    @property
    def sets(self) -> list[RRSet]:
        return [self[i] for i in range(self._count)]

    def hits(self, seeds) -> np.ndarray:
        """Boolean per set: does it contain any of ``seeds``."""
        hit = np.zeros(self._count, dtype=bool)
        for s in seeds:
            s = int(s)
            if not 0 <= s < self.n:
                raise ValueError(f"node id {s} out of range [0, {self.n})")
            hit[self.sets_containing(s)] = True
        return hit

    def coverage(self, seeds) -> float:
        if self._count == 0:
            return 0.0
        return float(self.hits(seeds).mean())


def build_collection(inst: Instance, count: int, master_seed: int, threads=None,
                     literal: bool = False, root=None) -> RRCollection:
    """``count`` RR sets for the instance's model, with the inverted index built."""
    if int(count) < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    coll = RRCollection(inst, master_seed, fixed_root=root, literal=literal, threads=threads)
    coll.extend_to(count)
    coll._flat()
    return coll


def coverage_fraction(coll: RRCollection, seeds) -> float:
    """Fraction of sets in ``coll`` that intersect ``seeds``."""
    return coll.coverage(seeds)


def estimate_spread(coll: RRCollection, seeds) -> tuple[float, float]:
    """``n`` times the coverage and its standard error."""
    hit = coll.hits(seeds).astype(np.float64)
    n = coll.n
    if hit.size == 0:
        return 0.0, 0.0
    se = float(hit.std(ddof=1)) / np.sqrt(hit.size) if hit.size > 1 else 0.0
    return n * float(hit.mean()), n * se
