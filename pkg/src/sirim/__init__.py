"""Influence under IC, SIR and time-bounded SIR cascades.

Forward simulators, live-edge and reverse-reachable samplers, a coupling
that checks IC dominates SIR sample by sample, and IMM seed selection.
"""

__version__ = "0.1.0"

from .coupling import CoupledOutcome, DominanceReport, coupled_batch, coupled_rr, dominance_report
from .exact import brute_force_opt, exact_sigma
from .fileformat import InstanceFormatError, parse_instance, read_instance, serialize_instance, write_instance
from .generators import ErdosRenyi, Fig1Gadget, Fig2Gadget, Path, Star, generate, search_fig2
from .graph import DiffusionParams, DirectedGraph, Instance, InstanceError, Model, make_instance
from .imm import ImmParams, SeedSelectionResult, imm, imm_params, node_selection
from .live_edge import LiveEdgeGraph, sample_live_ic, sample_live_sir, sample_live_tsir
from .probability import (aggregate_edge_prob, conditional_live_prob, gadget_probs,
                          joint_outedge_distribution)
from .rr import RRCollection, RRSet, build_collection, coverage_fraction, sample_rr_ic, sample_rr_sir, sample_rr_tsir
from .simulate import CascadeOutcome, SigmaEstimate, estimate_sigma, run_ic, run_sir, run_tsir
from .streams import set_threads

__all__ = [
    "CascadeOutcome", "CoupledOutcome", "DiffusionParams", "DirectedGraph", "DominanceReport",
    "ErdosRenyi", "Fig1Gadget", "Fig2Gadget", "ImmParams", "Instance", "InstanceError",
    "InstanceFormatError", "LiveEdgeGraph", "Model", "Path", "RRCollection", "RRSet",
    "SeedSelectionResult", "SigmaEstimate", "Star", "aggregate_edge_prob", "brute_force_opt",
    "build_collection", "conditional_live_prob", "coupled_batch", "coupled_rr", "coverage_fraction",
    "dominance_report", "estimate_sigma", "exact_sigma", "gadget_probs", "generate", "imm",
    "imm_params", "joint_outedge_distribution", "make_instance", "node_selection",
    "parse_instance", "read_instance", "run_ic", "run_sir", "run_tsir", "sample_live_ic",
    "sample_live_sir", "sample_live_tsir", "sample_rr_ic", "sample_rr_sir", "sample_rr_tsir",
    "search_fig2", "serialize_instance", "set_threads", "write_instance",
]
