"""Directed graphs in dual CSR form and diffusion instances built on them."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np


class Model(str, enum.Enum):
    IC = "ic"
    SIR = "sir"
    TSIR = "tsir"


class InstanceError(ValueError):
    """Raised when a graph or its diffusion parameters violate an invariant."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class DirectedGraph:
    """Immutable directed graph with edges identified by insertion index.

    Edge ``e`` goes ``src[e] -> dst[e]``. Both adjacency directions are kept
    in CSR form; within a node, edges appear in increasing edge id, which is
    the "index order" the RR samplers reveal edges in.
    """

    __slots__ = ("n", "src", "dst", "out_ptr", "out_dst", "out_eid",
                 "in_ptr", "in_src", "in_eid")

    def __init__(self, n: int, src, dst):
        if n < 0:
            raise InstanceError("node count must be non-negative")
        src = np.ascontiguousarray(src, dtype=np.int64)
        dst = np.ascontiguousarray(dst, dtype=np.int64)
        if src.shape != dst.shape or src.ndim != 1:
            raise InstanceError("src and dst must be 1-d arrays of equal length")
        if src.size:
            if src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n:
                raise InstanceError(f"edge endpoint out of range [0, {n})")
            loops = np.flatnonzero(src == dst)
            if loops.size:
                raise InstanceError(f"self-loop at edge {int(loops[0])} (node {int(src[loops[0]])})")
            key = src * n + dst
            order = np.argsort(key, kind="stable")
            sk = key[order]
            repeat = sk[1:] == sk[:-1]
            if repeat.any():
                bad = int(order[1:][repeat].min())
                raise InstanceError(
                    f"duplicate edge {int(src[bad])} -> {int(dst[bad])} at edge {bad}")
        self.n = int(n)
        self.src = _frozen(src)
        self.dst = _frozen(dst)
        self.out_ptr, self.out_eid = self._csr(src, n)
        self.out_dst = _frozen(dst[self.out_eid])
        self.in_ptr, self.in_eid = self._csr(dst, n)
        self.in_src = _frozen(src[self.in_eid])

    @staticmethod
    def _csr(keys: np.ndarray, n: int):
        order = np.argsort(keys, kind="stable").astype(np.int64)
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(keys, minlength=n), out=ptr[1:])
        return _frozen(ptr), _frozen(order)

    @property
    def m(self) -> int:
        return int(self.src.size)

    def out_adj(self, u: int) -> list[tuple[int, int]]:
        """``(target, edge id)`` pairs of ``u``'s out-edges in index order."""
        lo, hi = self.out_ptr[u], self.out_ptr[u + 1]
        return list(zip(self.out_dst[lo:hi].tolist(), self.out_eid[lo:hi].tolist()))

    def in_adj(self, v: int) -> list[tuple[int, int]]:
        lo, hi = self.in_ptr[v], self.in_ptr[v + 1]
        return list(zip(self.in_src[lo:hi].tolist(), self.in_eid[lo:hi].tolist()))

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    def reachable_from(self, sources: Iterable[int]) -> set[int]:
        seen = set(int(s) for s in sources)
        stack = list(seen)
        while stack:
            u = stack.pop()
            for v in self.out_dst[self.out_ptr[u]:self.out_ptr[u + 1]].tolist():
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst))

    def __repr__(self) -> str:
        return f"DirectedGraph(n={self.n}, m={self.m})"


@dataclass(frozen=True, eq=False)
class DiffusionParams:
    """Per-edge probabilities, per-node recovery, and the model tag.

    ``edge_prob`` holds ``p_e`` for IC and ``beta_e`` for SIR/TSIR.
    ``node_recovery`` is ``None`` for IC. ``horizon`` is only set for TSIR.
    """

    model: Model
    edge_prob: np.ndarray
    node_recovery: Optional[np.ndarray] = None
    horizon: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        prob = _frozen(np.array(self.edge_prob, dtype=np.float64, copy=True))
        object.__setattr__(self, "edge_prob", prob)
        if self.node_recovery is not None:
            rec = _frozen(np.array(self.node_recovery, dtype=np.float64, copy=True))
            object.__setattr__(self, "node_recovery", rec)
        if self.horizon is not None:
            object.__setattr__(self, "horizon", int(self.horizon))


@dataclass(frozen=True, eq=False)
class Instance:
    graph: DirectedGraph
    params: DiffusionParams
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        g, p = self.graph, self.params
        if p.edge_prob.shape != (g.m,):
            raise InstanceError(f"expected {g.m} edge probabilities, got {p.edge_prob.size}")
        prob = p.edge_prob
        if p.model is Model.IC:
            if p.node_recovery is not None:
                raise InstanceError("IC instances carry no recovery probabilities")
            if p.horizon is not None:
                raise InstanceError("horizon T only applies to the tsir model")
            bad = np.flatnonzero(~((prob >= 0.0) & (prob <= 1.0)))
            if bad.size:
                raise InstanceError(f"p must lie in [0, 1]; edge {int(bad[0])} has {prob[bad[0]]!r}")
            return
        bad = np.flatnonzero(~((prob > 0.0) & (prob <= 1.0)))
        if bad.size:
            raise InstanceError(f"beta must lie in (0, 1]; edge {int(bad[0])} has {prob[bad[0]]!r}")
        rec = p.node_recovery
        if rec is None or rec.shape != (g.n,):
            raise InstanceError(f"{p.model.value} instances need one gamma per node")
        bad = np.flatnonzero(~((rec > 0.0) & (rec <= 1.0)))
        if bad.size:
            raise InstanceError(f"gamma must lie in (0, 1]; node {int(bad[0])} has {rec[bad[0]]!r}")
        if p.model is Model.TSIR:
            if p.horizon is None or p.horizon < 0:
                raise InstanceError("tsir instances need a horizon T >= 0")
        elif p.horizon is not None:
            raise InstanceError("horizon T only applies to the tsir model")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    @property
    def model(self) -> Model:
        return self.params.model

    @property
    def horizon(self) -> Optional[int]:
        return self.params.horizon

    @property
    def gamma(self) -> np.ndarray:
        """Recovery probabilities; all ones for IC (one attempt per edge)."""
        if self.params.node_recovery is None:
            if "ones" not in self._cache:
                self._cache["ones"] = _frozen(np.ones(self.n))
            return self._cache["ones"]
        return self.params.node_recovery

    def matched_ic(self) -> "Instance":
        """IC instance whose edge probabilities equal the aggregated SIR marginals."""
        if self.model is Model.IC:
            return self
        from .probability import aggregate_edge_probs

        p = aggregate_edge_probs(self.params.edge_prob, self.gamma[self.graph.src])
        return Instance(self.graph, DiffusionParams(Model.IC, p))

    def with_model(self, model: Model | str, horizon: Optional[int] = None) -> "Instance":
        """Same graph and (beta, gamma) under SIR or TSIR."""
        model = Model(model)
        if self.model is Model.IC or model is Model.IC:
            raise InstanceError("with_model only switches between sir and tsir")
        return Instance(self.graph, DiffusionParams(
            model, self.params.edge_prob, self.params.node_recovery,
            horizon if model is Model.TSIR else None))

    def require(self, *models: Model) -> None:
        if self.model not in models:
            names = "/".join(m.value for m in models)
            raise InstanceError(f"operation needs a {names} instance, got {self.model.value}")

    def check_nodes(self, nodes: Iterable[int]) -> list[int]:
        out = []
        for v in nodes:
            v = int(v)
            if not 0 <= v < self.n:
                raise InstanceError(f"node id {v} out of range [0, {self.n})")
            out.append(v)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        a, b = self.params, other.params
        same_rec = (a.node_recovery is None and b.node_recovery is None) or (
            a.node_recovery is not None and b.node_recovery is not None
            and np.array_equal(a.node_recovery, b.node_recovery))
        return (self.graph == other.graph and a.model is b.model and a.horizon == b.horizon
                and np.array_equal(a.edge_prob, b.edge_prob) and same_rec)

    def __repr__(self) -> str:
        t = f", T={self.horizon}" if self.horizon is not None else ""
        return f"Instance({self.model.value}, n={self.n}, m={self.m}{t})"


def make_instance(n, edges, model="ic", gamma=None, horizon=None) -> Instance:
    """Build an instance from ``(src, dst, prob)`` triples.

    ``gamma`` may be a scalar (applied to every node) or a length-``n``
    sequence; it is ignored for IC.
    """
    model = Model(model)
    edges = list(edges)
    src = [e[0] for e in edges]
    dst = [e[1] for e in edges]
    prob = [e[2] for e in edges]
    rec = None
    if model is not Model.IC:
        if gamma is None:
            raise InstanceError(f"{model.value} instances need gamma")
        rec = np.broadcast_to(np.asarray(gamma, dtype=np.float64), (n,))
    return Instance(DirectedGraph(n, src, dst),
                    DiffusionParams(model, prob, rec, horizon if model is Model.TSIR else None))
