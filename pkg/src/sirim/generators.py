"""Instance generators: random graphs, small fixtures, and the two gadgets.

Probabilities given as a ``(lo, hi)`` pair are drawn uniformly per edge
(or per node for ``gamma``); a scalar is used as is. For ``model="ic"``
the edge value is ``p``; for SIR/TSIR it is ``beta``.

Gadget layout (one copy): seed ``v``; ``b`` middle nodes reached from
``v`` by random edges; collector ``u`` reached from every middle node by a
certain edge; ``n0`` outer nodes reached from ``u`` by certain edges.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from .graph import DiffusionParams, DirectedGraph, Instance, InstanceError, Model
from .probability import aggregate_edge_prob, gadget_probs

Prob = Union[float, tuple]


@dataclass(frozen=True)
class ErdosRenyi:
    n: int
    edge_density: float
    prob: Prob = 0.1
    gamma: Prob = 0.5
    model: str = "sir"
    horizon: Optional[int] = None


@dataclass(frozen=True)
class Star:
    """Center 0 with edges to leaves ``1..leaves``."""

    leaves: int
    prob: Prob = 1.0
    gamma: Prob = 1.0
    model: str = "ic"
    horizon: Optional[int] = None


@dataclass(frozen=True)
class Path:
    """Chain ``0 -> 1 -> ... -> length`` (``length`` edges)."""

    length: int
    prob: Prob = 1.0
    gamma: Prob = 1.0
    model: str = "ic"
    horizon: Optional[int] = None


@dataclass(frozen=True)
class Fig1Gadget:
    """One gadget; ``model="ic"`` gives the matched IC instance."""

    b: int
    n0: int
    beta: float
    gamma: float
    model: str = "sir"
    horizon: Optional[int] = None


@dataclass(frozen=True)
class Fig2Gadget:
    """A star (center ``0``, leaves ``1..star_leaves``) beside ``gadget_copies``
    gadgets that all share the seed vertex ``v = star_leaves + 1``.

    The star's center recovers after one round (gamma 1), so its spread is
    ``1 + star_leaves * left_edge_prob`` in every model.
    """

    star_leaves: int
    gadget_copies: int
    b: int
    n0: int
    beta: float
    gamma: float
    left_edge_prob: float
    model: str = "sir"
    horizon: Optional[int] = None

    @property
    def center(self) -> int:
        return 0

    @property
    def v(self) -> int:
        return self.star_leaves + 1


GeneratorSpec = Union[ErdosRenyi, Star, Path, Fig1Gadget, Fig2Gadget]
KINDS = {"erdos_renyi": ErdosRenyi, "star": Star, "path": Path,
         "fig1_gadget": Fig1Gadget, "fig2_gadget": Fig2Gadget}


def spec_kind(spec: GeneratorSpec) -> str:
    return next(k for k, cls in KINDS.items() if isinstance(spec, cls))


def spec_dict(spec: GeneratorSpec) -> dict:
    return {"kind": spec_kind(spec), **asdict(spec)}


def _draw(value: Prob, size: int, stream: np.random.Generator, name: str) -> np.ndarray:
    if isinstance(value, (tuple, list)):
        lo, hi = (float(x) for x in value)
        if not 0.0 <= lo <= hi <= 1.0:
            raise InstanceError(f"{name} range must satisfy 0 <= lo <= hi <= 1")
        return stream.uniform(lo, hi, size) if hi > lo else np.full(size, lo)
    return np.full(size, float(value))


def _positive(name: str, x: int, allow_zero: bool = False) -> int:
    if int(x) != x or x < (0 if allow_zero else 1):
        raise InstanceError(f"{name} must be a {'non-negative' if allow_zero else 'positive'} integer")
    return int(x)


def _finish(n, src, dst, prob, gamma, model, horizon) -> Instance:
    model = Model(model)
    rec = None if model is Model.IC else gamma
    return Instance(DirectedGraph(n, src, dst),
                    DiffusionParams(model, prob, rec, horizon if model is Model.TSIR else None))


def _erdos_renyi(spec: ErdosRenyi, stream):
    n = _positive("n", spec.n)
    d = float(spec.edge_density)
    if not 0.0 <= d <= 1.0:
        raise InstanceError("edge_density must lie in [0, 1]")
    pairs = n * (n - 1)
    m = int(stream.binomial(pairs, d)) if pairs else 0
    idx = np.sort(stream.choice(pairs, size=m, replace=False)) if m else np.zeros(0, np.int64)
    src = idx // max(n - 1, 1)
    r = idx % max(n - 1, 1)
    dst = r + (r >= src)
    prob = _draw(spec.prob, m, stream, "prob")
    gamma = _draw(spec.gamma, n, stream, "gamma")
    return _finish(n, src, dst, prob, gamma, spec.model, spec.horizon)


def _star(spec: Star, stream):
    k = _positive("leaves", spec.leaves)
    src = np.zeros(k, np.int64)
    dst = np.arange(1, k + 1)
    return _finish(k + 1, src, dst, _draw(spec.prob, k, stream, "prob"),
                   _draw(spec.gamma, k + 1, stream, "gamma"), spec.model, spec.horizon)


def _path(spec: Path, stream):
    k = _positive("length", spec.length)
    src = np.arange(k)
    return _finish(k + 1, src, src + 1, _draw(spec.prob, k, stream, "prob"),
                   _draw(spec.gamma, k + 1, stream, "gamma"), spec.model, spec.horizon)


def _gadget_edges(v: int, first: int, b: int, n0: int):
    """Edges of one gadget with middles at ``first..first+b-1``; returns
    (src, dst, is_random, next free node id)."""
    mids = list(range(first, first + b))
    u = first + b
    outs = list(range(u + 1, u + 1 + n0))
    src = [v] * b + mids + [u] * n0
    dst = mids + [u] * b + outs
    random = [True] * b + [False] * (b + n0)
    return src, dst, random, u + 1 + n0


def _gadgets(v: int, first: int, copies: int, b: int, n0: int, beta: float, gamma: float,
             model: str):
    src, dst, random = [], [], []
    nxt = first
    for _ in range(copies):
        s, d, r, nxt = _gadget_edges(v, nxt, b, n0)
        src += s
        dst += d
        random += r
    random = np.array(random)
    if Model(model) is Model.IC:
        prob = np.where(random, aggregate_edge_prob(beta, gamma), 1.0)
    else:
        prob = np.where(random, beta, 1.0)
    return src, dst, prob, nxt


def _fig1(spec: Fig1Gadget, stream):
    b = _positive("b", spec.b)
    n0 = _positive("n0", spec.n0, allow_zero=True)
    src, dst, prob, n = _gadgets(0, 1, 1, b, n0, spec.beta, spec.gamma, spec.model)
    return _finish(n, src, dst, prob, np.full(n, float(spec.gamma)), spec.model, spec.horizon)


def _fig2(spec: Fig2Gadget, stream):
    L = _positive("star_leaves", spec.star_leaves)
    c = _positive("gadget_copies", spec.gadget_copies)
    b = _positive("b", spec.b)
    n0 = _positive("n0", spec.n0, allow_zero=True)
    q = float(spec.left_edge_prob)
    if not 0.0 < q <= 1.0:
        raise InstanceError("left_edge_prob must lie in (0, 1]")
    v = L + 1
    src, dst, prob, n = _gadgets(v, v + 1, c, b, n0, spec.beta, spec.gamma, spec.model)
    src = [0] * L + src
    dst = list(range(1, L + 1)) + dst
    prob = np.concatenate([np.full(L, q), prob])
    gamma = np.full(n, float(spec.gamma))
    gamma[0] = 1.0
    return _finish(n, src, dst, prob, gamma, spec.model, spec.horizon)


_BUILDERS = {ErdosRenyi: _erdos_renyi, Star: _star, Path: _path, Fig1Gadget: _fig1, Fig2Gadget: _fig2}


def generate(spec: GeneratorSpec, stream: np.random.Generator) -> Instance:
    """Build the instance described by ``spec``; random parts draw from ``stream``."""
    for name in ("beta", "gamma"):
        val = getattr(spec, name, None)
        if isinstance(val, float) and not 0.0 < val <= 1.0:
            raise InstanceError(f"{name} must lie in (0, 1], got {val}")
    return _BUILDERS[type(spec)](spec, stream)


# ----------------------------------------------------------- fig2 analytics

def fig2_spreads(spec: Fig2Gadget) -> dict:
    """Closed-form single-seed spreads of the star center, ``v`` and a middle node."""
    p = aggregate_edge_prob(spec.beta, spec.gamma)
    p1, p2 = gadget_probs(spec.b, spec.beta, spec.gamma)
    c, b, n0 = spec.gadget_copies, spec.b, spec.n0
    return {
        "center": 1.0 + spec.star_leaves * spec.left_edge_prob,
        "v_ic": 1.0 + c * b * p + c * p1 * (1 + n0),
        "v_sir": 1.0 + c * b * p + c * p2 * (1 + n0),
        "middle": 2.0 + n0,
    }


def fig2_margin(spec: Fig2Gadget) -> float:
    """Smallest gap keeping IC's best single seed at ``v`` and SIR's at the center."""
    s = fig2_spreads(spec)
    best_other = max(s["middle"], 1.0 + spec.n0)
    return min(s["v_ic"] - s["center"], s["center"] - s["v_sir"],
               s["center"] - best_other, s["v_ic"] - best_other)


def search_fig2(max_nodes: int = 40, max_joint_degree: int = 12, horizon: Optional[int] = None):
    """Grid search for a small fig2 instance where the two models disagree.

    Returns the ``Fig2Gadget`` with the widest analytic margin (see :func:`fig2_margin`).
    The seed vertex's out-degree ``copies * b`` is kept within
    ``max_joint_degree`` so the instance stays exactly solvable.
    """
    best, best_margin = None, 0.0
    grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    for c in (2, 3, 4):
        for b in range(2, max_joint_degree // c + 1):
            for n0 in range(0, 9):
                for beta in grid:
                    for gamma in grid:
                        base = Fig2Gadget(1, c, b, n0, beta, gamma, 1.0, "sir", horizon)
                        s = fig2_spreads(base)
                        lo, hi = max(s["v_sir"], s["middle"]), s["v_ic"]
                        if hi <= lo:
                            continue
                        # center spread placed mid-gap, with a whole number of leaves
                        for leaves in range(1, 13):
                            q = ((lo + hi) / 2.0 - 1.0) / leaves
                            if not 0.1 <= q <= 0.9:
                                continue
                            q = round(q, 3)
                            spec = Fig2Gadget(leaves, c, b, n0, beta, gamma, q, "sir", horizon)
                            nodes = 2 + leaves + c * (b + 1 + n0)
                            if nodes > max_nodes:
                                continue
                            margin = fig2_margin(spec)
                            if margin > best_margin + 1e-12:
                                best, best_margin = spec, margin
    if best is None:
        raise RuntimeError("no fig2 configuration separates the two models")
    return best, best_margin


__all__ = ["ErdosRenyi", "Star", "Path", "Fig1Gadget", "Fig2Gadget", "GeneratorSpec",
           "generate", "fig2_spreads", "fig2_margin", "search_fig2", "spec_dict", "KINDS"]
