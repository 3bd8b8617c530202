"""Instance arrays in the layout the compiled kernels expect."""

from __future__ import annotations

from typing import NamedTuple, Union

import numpy as np

from .graph import Instance, Model
from .streams import seed_from

MODEL_CODE = {Model.IC: 0, Model.SIR: 1, Model.TSIR: 2}

Stream = Union[np.random.Generator, int]


class KernelView(NamedTuple):
    model: int
    out_ptr: np.ndarray
    out_dst: np.ndarray
    out_eid: np.ndarray
    in_ptr: np.ndarray
    in_src: np.ndarray
    in_eid: np.ndarray
    prob: np.ndarray
    gamma: np.ndarray
    horizon: int   # -1 when the process has no time limit


def kernel_view(inst: Instance) -> KernelView:
    view = inst._cache.get("kernel_view")
    if view is None:
        g = inst.graph
        view = KernelView(
            MODEL_CODE[inst.model], g.out_ptr, g.out_dst, g.out_eid, g.in_ptr, g.in_src,
            g.in_eid, inst.params.edge_prob, np.ascontiguousarray(inst.gamma),
            -1 if inst.horizon is None else int(inst.horizon))
        inst._cache["kernel_view"] = view
    return view


def stream_seed(stream: Stream) -> int:
    """Kernel seed from a numpy Generator (consumes one draw) or a plain integer."""
    if isinstance(stream, np.random.Generator):
        return seed_from(stream)
    if isinstance(stream, (int, np.integer)) and not isinstance(stream, bool):
        return int(stream) & ((1 << 64) - 1)
    raise TypeError(f"expected a numpy Generator or an integer seed, got {type(stream).__name__}")


def node_array(inst: Instance, nodes) -> np.ndarray:
    return np.array(sorted(set(inst.check_nodes(nodes))), dtype=np.int64)
