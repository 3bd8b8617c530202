"""Text format for instances.

::

    n <int>                  # first directive
    model ic|sir|tsir
    T <int>                  # tsir only
    gamma_default <float>
    gamma <node> <float>
    edge <src> <dst> <float> # p for ic, beta for sir/tsir

``#`` starts a comment. Edge order in the file is the edge index order.
"""

from __future__ import annotations

import io
from typing import IO, Union

import numpy as np

from .graph import DiffusionParams, DirectedGraph, Instance, InstanceError, Model


class InstanceFormatError(InstanceError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise InstanceFormatError(lineno, f"{what} must be an integer, got {tok!r}") from None


def _float(tok: str, lineno: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise InstanceFormatError(lineno, f"{what} must be a number, got {tok!r}") from None


def parse_instance(text: Union[str, IO[str]]) -> Instance:
    """Parse and validate an instance from a string or text stream."""
    lines = io.StringIO(text) if isinstance(text, str) else text
    n = None
    model = None
    horizon = None
    horizon_line = 0
    gamma_default = None
    gammas: dict[int, float] = {}
    src: list[int] = []
    dst: list[int] = []
    prob: list[float] = []
    prob_lines: list[int] = []
    seen: dict[tuple[int, int], int] = {}

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        key = tok[0]
        if n is None:
            if key != "n" or len(tok) != 2:
                raise InstanceFormatError(lineno, "first directive must be 'n <int>'")
            n = _int(tok[1], lineno, "n")
            if n < 1:
                raise InstanceFormatError(lineno, "n must be positive")
            continue
        if key == "edge":
            if len(tok) != 4:
                raise InstanceFormatError(lineno, "expected 'edge <src> <dst> <float>'")
            s = _int(tok[1], lineno, "edge source")
            d = _int(tok[2], lineno, "edge target")
            if not (0 <= s < n and 0 <= d < n):
                raise InstanceFormatError(lineno, f"node id out of range [0, {n})")
            if s == d:
                raise InstanceFormatError(lineno, f"self-loop on node {s}")
            if (s, d) in seen:
                raise InstanceFormatError(
                    lineno, f"duplicate edge {s} -> {d} (first on line {seen[(s, d)]})")
            seen[(s, d)] = lineno
            src.append(s)
            dst.append(d)
            prob.append(_float(tok[3], lineno, "edge probability"))
            prob_lines.append(lineno)
        elif key == "model":
            if len(tok) != 2 or tok[1] not in ("ic", "sir", "tsir"):
                raise InstanceFormatError(lineno, "expected 'model ic|sir|tsir'")
            if model is not None:
                raise InstanceFormatError(lineno, "model given twice")
            model = Model(tok[1])
        elif key == "T":
            if len(tok) != 2:
                raise InstanceFormatError(lineno, "expected 'T <int>'")
            horizon = _int(tok[1], lineno, "T")
            horizon_line = lineno
            if horizon < 0:
                raise InstanceFormatError(lineno, "T must be >= 0")
        elif key == "gamma_default":
            if len(tok) != 2:
                raise InstanceFormatError(lineno, "expected 'gamma_default <float>'")
            gamma_default = _float(tok[1], lineno, "gamma_default")
            if not 0.0 < gamma_default <= 1.0:
                raise InstanceFormatError(lineno, f"gamma must lie in (0, 1], got {tok[1]}")
        elif key == "gamma":
            if len(tok) != 3:
                raise InstanceFormatError(lineno, "expected 'gamma <node> <float>'")
            v = _int(tok[1], lineno, "gamma node")
            if not 0 <= v < n:
                raise InstanceFormatError(lineno, f"node id out of range [0, {n})")
            g = _float(tok[2], lineno, "gamma")
            if not 0.0 < g <= 1.0:
                raise InstanceFormatError(lineno, f"gamma must lie in (0, 1], got {tok[2]}")
            gammas[v] = g
        elif key == "n":
            raise InstanceFormatError(lineno, "n given twice")
        else:
            raise InstanceFormatError(lineno, f"unknown directive {key!r}")

    if n is None:
        raise InstanceFormatError(0, "empty instance")
    if model is None:
        raise InstanceFormatError(0, "missing 'model' directive")
    if model is Model.TSIR and horizon is None:
        raise InstanceFormatError(0, "tsir instances need 'T <int>'")
    if model is not Model.TSIR and horizon is not None:
        raise InstanceFormatError(horizon_line, "T only applies to model tsir")

    lo = 0.0 if model is Model.IC else np.nextafter(0.0, 1.0)
    for p, ln in zip(prob, prob_lines):
        if not lo <= p <= 1.0:
            name = "p must lie in [0, 1]" if model is Model.IC else "beta must lie in (0, 1]"
            raise InstanceFormatError(ln, f"{name}, got {p!r}")

    rec = None
    if model is not Model.IC:
        rec = np.empty(n)
        for v in range(n):
            g = gammas.get(v, gamma_default)
            if g is None:
                raise InstanceFormatError(0, f"node {v} has no gamma and no gamma_default is set")
            rec[v] = g
    graph = DirectedGraph(n, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64))
    return Instance(graph, DiffusionParams(model, np.array(prob), rec, horizon))


def read_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh)


def _num(x: float) -> str:
    return format(float(x), ".17g")


def serialize_instance(inst: Instance) -> str:
    """Render ``inst`` so that :func:`parse_instance` reproduces it exactly."""
    out = [f"n {inst.n}", f"model {inst.model.value}"]
    if inst.model is Model.TSIR:
        out.append(f"T {inst.horizon}")
    rec = inst.params.node_recovery
    if rec is not None:
        vals, counts = np.unique(rec, return_counts=True)
        common = vals[np.argmax(counts)]
        out.append(f"gamma_default {_num(common)}")
        for v in np.flatnonzero(rec != common).tolist():
            out.append(f"gamma {v} {_num(rec[v])}")
    g = inst.graph
    out.extend(f"edge {s} {d} {_num(p)}"
               for s, d, p in zip(g.src.tolist(), g.dst.tolist(), inst.params.edge_prob.tolist()))
    return "\n".join(out) + "\n"


def write_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_instance(inst))
