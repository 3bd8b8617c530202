"""Closed-form probabilities linking SIR to IC, plus a truncated-series oracle.

Notation: an SIR node with recovery probability ``gamma`` attempts each
out-edge once per round and recovers after the attempt with probability
``gamma``. Its recovery round ``R`` is geometric, so an edge with infection
probability ``beta`` is live iff its first success round is ``<= R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit


def _check_unit(name: str, x: float, allow_zero: bool = False) -> float:
    x = float(x)
    ok = (0.0 <= x <= 1.0) if allow_zero else (0.0 < x <= 1.0)
    if not ok:
        rng = "[0, 1]" if allow_zero else "(0, 1]"
        raise ValueError(f"{name} must lie in {rng}, got {x!r}")
    return x


@njit(cache=True)
def live_given_blocked(beta_e, gamma, log_q):
    """Pr[e live | sibling edges with survival product q blocked], ``log_q = log q``.

    With ``a = 1-(1-g)q`` and ``b = 1-(1-g)q(1-beta_e)`` the probability is
    ``1 - (1-beta_e) a / b``. Both factors are formed as ``g + (1-g)(1-x)``
    with ``1-x`` from ``expm1`` so that ``q`` near 1 keeps full precision.
    """
    if beta_e >= 1.0:
        return 1.0
    a = gamma + (1.0 - gamma) * -math.expm1(log_q)
    b = gamma + (1.0 - gamma) * -math.expm1(log_q + math.log1p(-beta_e))
    return 1.0 - (1.0 - beta_e) * a / b


def aggregate_edge_prob(beta: float, gamma: float) -> float:
    """Probability that an infected node ever infects one given out-neighbour.

    Equals ``1 - gamma (1-beta) / (gamma + beta - gamma beta)``.

    >>> aggregate_edge_prob(0.5, 1.0)
    0.5
    """
    beta = _check_unit("beta", beta)
    gamma = _check_unit("gamma", gamma)
    return float(live_given_blocked(beta, gamma, 0.0))


@njit(cache=True)
def _aggregate_many(beta, gamma):
    out = np.empty(beta.size)
    for i in range(beta.size):
        out[i] = live_given_blocked(beta[i], gamma[i], 0.0)
    return out


def aggregate_edge_probs(beta, gamma) -> np.ndarray:
    """Vectorised :func:`aggregate_edge_prob` (no range checks).

    Runs the same compiled arithmetic as the reverse samplers, so the IC
    threshold of an edge never falls below its SIR conditional at ``q = 1``.
    """
    beta = np.asarray(beta, dtype=np.float64)
    gamma = np.broadcast_to(np.asarray(gamma, dtype=np.float64), beta.shape)
    flat = _aggregate_many(np.ascontiguousarray(beta.ravel()), np.ascontiguousarray(gamma.ravel()))
    return flat.reshape(beta.shape)


def conditional_live_prob(beta_e: float, gamma_u: float, blocked_betas=()) -> float:
    """Pr[e live | every edge in ``blocked_betas`` is blocked] for one source node.

    All edges share the source's recovery probability ``gamma_u``. With
    ``q = prod(1 - beta_f)`` over the blocked set this is
    ``1 - (1-beta_e)(1-(1-gamma)q) / (1-(1-gamma)q(1-beta_e))``.
    """
    beta_e = _check_unit("beta_e", beta_e)
    gamma_u = _check_unit("gamma", gamma_u)
    log_q = 0.0
    for b in blocked_betas:
        b = _check_unit("blocked beta", b)
        if b >= 1.0:
            raise ValueError("an edge with beta = 1 is never blocked; cannot condition on it")
        log_q += math.log1p(-b)
    return float(live_given_blocked(beta_e, gamma_u, log_q))


def gadget_probs(b: int, beta: float, gamma: float) -> tuple[float, float]:
    """Infection probability of the gadget's collector node under IC and SIR.

    A seed reaches ``b`` middle nodes through edges sharing ``(beta, gamma)``;
    the collector is infected as soon as any middle node is. Returns
    ``(p1, p2)`` where ``p1 = 1 - (1-p)^b`` uses the matched IC probability
    ``p`` and ``p2 = 1 - gamma x / (1 - (1-gamma) x)`` with ``x = (1-beta)^b``.
    """
    if int(b) != b or b < 1:
        raise ValueError(f"b must be a positive integer, got {b!r}")
    beta = _check_unit("beta", beta)
    gamma = _check_unit("gamma", gamma)
    if beta >= 1.0:
        return 1.0, 1.0
    miss = gamma * (1.0 - beta) / (gamma + (1.0 - gamma) * beta)
    p1 = -math.expm1(b * math.log(miss))
    x = math.exp(b * math.log1p(-beta))
    p2 = 1.0 - gamma * x / (gamma + (1.0 - gamma) * -math.expm1(b * math.log1p(-beta)))
    return p1, p2


@dataclass(frozen=True)
class OutEdgeJointDist:
    """Joint live/blocked law of one node's out-edges.

    ``probs[mask]`` is the probability that exactly the edges whose bits are
    set in ``mask`` are live (bit ``i`` is the ``i``-th edge). ``tail`` bounds
    the mass dropped by truncating the series after ``terms`` rounds.
    """

    betas: tuple
    gamma: float
    probs: np.ndarray
    tail: float
    terms: int

    @property
    def degree(self) -> int:
        return len(self.betas)

    def marginal(self, i: int) -> float:
        masks = np.arange(self.probs.size)
        return float(self.probs[(masks >> i) & 1 == 1].sum())

    def all_blocked(self) -> float:
        return float(self.probs[0])


MAX_JOINT_DEGREE = 12


def joint_outedge_distribution(betas, gamma: float, tol: float = 1e-13) -> OutEdgeJointDist:
    """Enumerate the ``2^d`` live patterns of ``d`` out-edges by direct summation.

    Sums ``gamma (1-gamma)^(t-1) prod_live (1-(1-b)^t) prod_blocked (1-b)^t``
    over recovery rounds ``t`` until the remaining recovery mass
    ``(1-gamma)^N`` drops below ``tol``.
    """
    betas = tuple(_check_unit("beta", b) for b in betas)
    gamma = _check_unit("gamma", gamma)
    d = len(betas)
    if not 1 <= d <= MAX_JOINT_DEGREE:
        raise ValueError(f"out-degree must be in [1, {MAX_JOINT_DEGREE}], got {d}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if gamma >= 1.0:
        terms = 1
    else:
        terms = max(1, math.ceil(math.log(tol) / math.log1p(-gamma)))
    tail = (1.0 - gamma) ** terms

    masks = np.arange(1 << d)
    live = ((masks[:, None] >> np.arange(d)[None, :]) & 1).astype(bool)   # (2^d, d)
    fail = 1.0 - np.asarray(betas)
    probs = np.zeros(1 << d)
    chunk = 4096
    for t0 in range(1, terms + 1, chunk):
        t = np.arange(t0, min(terms, t0 + chunk - 1) + 1, dtype=np.float64)
        weight = gamma * (1.0 - gamma) ** (t - 1.0)                  # (c,)
        blocked_t = fail[:, None] ** t[None, :]                       # (d, c)
        per_edge = np.where(live[:, :, None], 1.0 - blocked_t[None], blocked_t[None])
        probs += per_edge.prod(axis=1) @ weight
    return OutEdgeJointDist(betas, gamma, probs, tail, terms)
