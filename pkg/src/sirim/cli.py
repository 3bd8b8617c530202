"""Command-line entry point.

Every command prints one JSON object ``{"manifest": ..., "result": ...}``
on stdout. Exit codes: 0 success, 1 runtime error, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .coupling import coupled_batch, dominance_report
from .fileformat import read_instance, write_instance
from .generators import KINDS, generate, spec_dict
from .graph import Instance, Model
from .imm import imm
from .probability import gadget_probs
from .rr import build_collection, estimate_spread
from .simulate import estimate_sigma
from .streams import set_threads


def node_list(text: str) -> list[int]:
    """``"0,4,17"`` -> ``[0, 4, 17]``; the empty string is the empty set."""
    text = text.strip()
    if not text:
        return []
    try:
        nodes = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated node ids, got {text!r}") from None
    if any(v < 0 for v in nodes):
        raise argparse.ArgumentTypeError("node ids must be non-negative")
    return nodes


def float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def prob_arg(text: str):
    """A probability, or ``lo:hi`` for per-item uniform draws."""
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return (float(lo), float(hi))
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or lo:hi, got {text!r}") from None


def _load(path: str, *models: Model) -> Instance:
    inst = read_instance(path)
    if models:
        inst.require(*models)
    return inst


# ------------------------------------------------------------------ commands

def cmd_gen(args):
    fields = {
        "erdos_renyi": dict(n=args.n, edge_density=args.density, prob=args.prob, gamma=args.gamma),
        "star": dict(leaves=args.leaves, prob=args.prob, gamma=args.gamma),
        "path": dict(length=args.length, prob=args.prob, gamma=args.gamma),
        "fig1_gadget": dict(b=args.b, n0=args.n0, beta=args.prob, gamma=args.gamma),
        "fig2_gadget": dict(star_leaves=args.leaves, gadget_copies=args.copies, b=args.b,
                            n0=args.n0, beta=args.prob, gamma=args.gamma,
                            left_edge_prob=args.left_prob),
    }[args.kind]
    missing = [k for k, v in fields.items() if v is None]
    if missing:
        raise UsageError(f"gen {args.kind} needs: {', '.join('--' + m.replace('_', '-') for m in missing)}")
    spec = KINDS[args.kind](**fields, model=args.model, horizon=args.T)
    inst = generate(spec, np.random.default_rng(args.seed))
    write_instance(inst, args.out)
    return {"path": args.out, "n": inst.n, "m": inst.m, "spec": spec_dict(spec)}


def cmd_sim(args):
    inst = _load(args.instance)
    est = estimate_sigma(inst, args.seeds, args.runs, args.seed)
    return {"model": inst.model.value, "seeds": sorted(set(args.seeds)), **est.as_dict()}


def cmd_estimate(args):
    inst = _load(args.instance)
    coll = build_collection(inst, args.count, args.seed)
    mean, se = estimate_spread(coll, args.seeds)
    return {"model": inst.model.value, "seeds": sorted(set(args.seeds)), "estimate": mean,
            "stderr": se, "count": len(coll), "total_work": coll.total_work}


def cmd_select(args):
    inst = _load(args.instance)
    res = imm(inst, args.k, args.epsilon, args.ell, args.seed)
    return {"model": inst.model.value, **res.as_dict()}


def cmd_compare(args):
    inst = _load(args.instance, Model.SIR)
    rep = dominance_report(inst, args.seeds, args.runs, args.seed,
                           coupled_samples=args.coupled)
    return rep.as_dict()


def cmd_couple(args):
    inst = _load(args.instance, Model.SIR)
    st = coupled_batch(inst, args.runs, args.seed, root=args.root)
    sir_sizes = np.diff(st.rr_sir_ptr)
    ic_sizes = np.diff(st.rr_ic_ptr)
    return {"samples": st.samples, "root": args.root, "violations": st.violations,
            "mean_rr_sir": float(sir_sizes.mean()), "mean_rr_ic": float(ic_sizes.mean()),
            "mean_revealed": float(st.revealed_counts.mean())}


def cmd_gadget_scan(args):
    rows = []
    for b in args.b:
        for beta in args.beta:
            for gamma in args.gamma:
                p1, p2 = gadget_probs(b, beta, gamma)
                rows.append({"b": b, "beta": beta, "gamma": gamma, "p1": p1, "p2": p2,
                             "ratio": p1 / p2 if p2 > 0 else math.inf})
    if args.asymptotic:
        for b in args.b:
            beta, gamma = b ** -1.5, b ** -0.5
            p1, p2 = gadget_probs(b, beta, gamma)
            rows.append({"b": b, "beta": beta, "gamma": gamma, "p1": p1, "p2": p2,
                         "ratio": p1 / p2 if p2 > 0 else math.inf})
    return {"rows": rows}


class UsageError(Exception):
    pass


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sirim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        sp.add_argument("--threads", type=positive_int, default=None,
                        help="worker threads (default: CPU count)")
        sp.add_argument("--csv", metavar="PATH", help="also write result rows as CSV")

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--kind", required=True, choices=sorted(KINDS))
    g.add_argument("--out", required=True)
    g.add_argument("--model", choices=[m.value for m in Model], default="sir")
    g.add_argument("--T", type=int, default=None, help="horizon for tsir")
    g.add_argument("--n", type=positive_int)
    g.add_argument("--density", type=float)
    g.add_argument("--leaves", type=positive_int)
    g.add_argument("--length", type=positive_int)
    g.add_argument("--b", type=positive_int)
    g.add_argument("--n0", type=int)
    g.add_argument("--copies", type=positive_int)
    g.add_argument("--left-prob", type=float)
    g.add_argument("--prob", type=prob_arg, help="p (ic) or beta; lo:hi draws uniformly")
    g.add_argument("--gamma", type=prob_arg, default=1.0)
    common(g)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sim", help="Monte-Carlo influence spread")
    s.add_argument("--instance", required=True)
    s.add_argument("--seeds", type=node_list, required=True, help="e.g. 0,4,17")
    s.add_argument("--runs", type=positive_int, default=10_000)
    common(s)
    s.set_defaults(func=cmd_sim)

    e = sub.add_parser("estimate", help="spread estimate from RR sets")
    e.add_argument("--instance", required=True)
    e.add_argument("--seeds", type=node_list, required=True)
    e.add_argument("--count", type=positive_int, default=10_000)
    common(e)
    e.set_defaults(func=cmd_estimate)

    sel = sub.add_parser("select", help="IMM seed selection")
    sel.add_argument("--instance", required=True)
    sel.add_argument("--k", type=positive_int, required=True)
    sel.add_argument("--epsilon", type=float, default=0.1)
    sel.add_argument("--ell", type=float, default=1.0)
    common(sel)
    sel.set_defaults(func=cmd_select)

    c = sub.add_parser("compare", help="IC vs SIR spread under matched parameters")
    c.add_argument("--instance", required=True)
    c.add_argument("--seeds", type=node_list, action="append", required=True,
                   help="seed set; repeat for several")
    c.add_argument("--runs", type=positive_int, default=100_000)
    c.add_argument("--coupled", type=positive_int, default=None,
                   help="coupled RR samples (default min(runs, 100000))")
    common(c)
    c.set_defaults(func=cmd_compare)

    cp = sub.add_parser("couple", help="coupled IC/SIR RR samples from one root")
    cp.add_argument("--instance", required=True)
    cp.add_argument("--root", type=int, required=True)
    cp.add_argument("--runs", type=positive_int, default=100_000)
    common(cp)
    cp.set_defaults(func=cmd_couple)

    gs = sub.add_parser("gadget-scan", help="gadget collector probabilities over a grid")
    gs.add_argument("--b", type=int_list, required=True, help="e.g. 2,4,8")
    gs.add_argument("--beta", type=float_list, default=[])
    gs.add_argument("--gamma", type=float_list, default=[])
    gs.add_argument("--asymptotic", action="store_true",
                    help="add rows with gamma = b^-0.5, beta = b^-1.5")
    common(gs, seed=False)
    gs.set_defaults(func=cmd_gadget_scan)
    return p


def _write_csv(path: str, result: dict) -> None:
    rows = result.get("rows") if isinstance(result.get("rows"), list) else [result]
    flat = [{k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()}
            for r in rows]
    keys = list(dict.fromkeys(k for r in flat for k in r))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(flat)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k != "func"}
    start = time.perf_counter()
    try:
        set_threads(args.threads)
        result = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sirim {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"sirim {args.command}: {exc}", file=sys.stderr)
        return 1
    finally:
        set_threads(None)
    manifest = {"command": args.command, "params": params, "seed": params.get("seed"),
                "version": __version__, "duration_s": time.perf_counter() - start}
    payload = _jsonable({"manifest": manifest, "result": result})
    if args.csv:
        try:
            _write_csv(args.csv, payload["result"])
        except OSError as exc:
            print(f"sirim {args.command}: {exc}", file=sys.stderr)
            return 1
    json.dump(payload, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
