"""Compiled inner loops shared by the simulators, samplers and selectors.

Graph arguments are the CSR arrays of :class:`sirim.graph.DirectedGraph`;
``prob`` is indexed by edge id and ``gamma`` by node. Model codes: 0 IC,
1 SIR, 2 TSIR. Workspace arrays are passed in zeroed and handed back zeroed
so one allocation serves a whole chunk of samples.
"""

import numpy as np
from numba import njit

from .probability import live_given_blocked
from .streams import FOREVER, derive_seed, geometric, geometric_by_rounds, uniform

IC, SIR, TSIR = 0, 1, 2
_UNSET = np.int64(1) << np.int64(62)


# ---------------------------------------------------------------- heap on int64

@njit(cache=True, inline="always")
def _heap_push(heap, size, key):
    i = size
    heap[i] = key
    while i > 0:
        parent = (i - 1) >> 1
        if heap[parent] <= key:
            break
        heap[i] = heap[parent]
        i = parent
    heap[i] = key
    return size + 1


@njit(cache=True, inline="always")
def _heap_pop(heap, size):
    top = heap[0]
    size -= 1
    last = heap[size]
    i = 0
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and heap[c + 1] < heap[c]:
            c += 1
        if heap[c] >= last:
            break
        heap[i] = heap[c]
        i = c
    if size > 0:
        heap[i] = last
    return top, size


# ------------------------------------------------------- bounded shortest paths

@njit(cache=True)
def _dial(ptr, nbr, weight, sources, nsrc, bound, dist, head, enode, enext, touched):
    """Bucket-queue shortest paths with integer weights in [1, bound].

    ``weight[k] <= 0`` marks CSR slot ``k`` as absent. ``dist`` must be
    ``> bound`` everywhere on entry. Returns the number of nodes within
    ``bound``; they are listed in ``touched`` with their ``dist`` set.
    """
    for d in range(bound + 1):
        head[d] = -1
    ne = 0
    nt = 0
    pending = 0
    for i in range(nsrc):
        s = sources[i]
        if dist[s] > bound:
            touched[nt] = s
            nt += 1
        if dist[s] != 0:
            dist[s] = 0
            enode[ne] = s
            enext[ne] = head[0]
            head[0] = ne
            ne += 1
            pending += 1
    for d in range(bound + 1):
        if pending == 0:
            break
        while head[d] != -1:
            x = head[d]
            head[d] = enext[x]
            pending -= 1
            u = enode[x]
            if dist[u] != d:
                continue
            for k in range(ptr[u], ptr[u + 1]):
                w = weight[k]
                if w <= 0:
                    continue
                nd = d + w
                v = nbr[k]
                if nd <= bound and nd < dist[v]:
                    if dist[v] > bound:
                        touched[nt] = v
                        nt += 1
                    dist[v] = nd
                    enode[ne] = v
                    enext[ne] = head[nd]
                    head[nd] = ne
                    ne += 1
                    pending += 1
    return nt


# ------------------------------------------------------------ forward cascades

@njit(cache=True)
def _cascade(model, out_ptr, out_dst, out_eid, prob, gamma, horizon, seeds,
             st, state, cur, nxt, touched):
    """One forward cascade; returns the influenced count, listed in ``touched``.

    ``state`` is 0 susceptible, 1 infected/active, 2 recovered. IC runs a
    FIFO so activations are processed round by round. SIR/TSIR rounds: each
    infected node attempts every susceptible out-neighbour, then recovers;
    nodes infected in a round start attempting in the next one. ``horizon``
    < 0 means no time limit.
    """
    cnt = 0
    ncur = 0
    for i in range(seeds.size):
        s = seeds[i]
        if state[s] == 0:
            state[s] = 1
            touched[cnt] = s
            cnt += 1
            cur[ncur] = s
            ncur += 1
    if model == IC:
        h = 0
        while h < cnt:
            u = touched[h]
            h += 1
            for k in range(out_ptr[u], out_ptr[u + 1]):
                v = out_dst[k]
                if state[v] == 0 and uniform(st) < prob[out_eid[k]]:
                    state[v] = 1
                    touched[cnt] = v
                    cnt += 1
        return cnt
    t = 0
    while ncur > 0 and (horizon < 0 or t < horizon):
        t += 1
        nn = 0
        for i in range(ncur):
            u = cur[i]
            for k in range(out_ptr[u], out_ptr[u + 1]):
                v = out_dst[k]
                if state[v] == 0 and uniform(st) < prob[out_eid[k]]:
                    state[v] = 1
                    touched[cnt] = v
                    cnt += 1
                    nxt[nn] = v
                    nn += 1
            if uniform(st) < gamma[u]:
                state[u] = 2
            else:
                nxt[nn] = u
                nn += 1
        cur, nxt = nxt, cur
        ncur = nn
    return cnt


@njit(cache=True, nogil=True)
def cascade_once(model, out_ptr, out_dst, out_eid, prob, gamma, horizon, seeds, seed):
    n = out_ptr.size - 1
    st = np.empty(1, np.uint64)
    st[0] = np.uint64(seed)
    state = np.zeros(n, np.int8)
    touched = np.empty(n, np.int64)
    cnt = _cascade(model, out_ptr, out_dst, out_eid, prob, gamma, horizon, seeds, st,
                   state, np.empty(n, np.int64), np.empty(n, np.int64), touched)
    return touched[:cnt].copy()


@njit(cache=True, nogil=True)
def cascade_chunk(model, out_ptr, out_dst, out_eid, prob, gamma, horizon, seeds, master, lo, hi):
    """Influenced counts of runs ``lo..hi-1`` plus per-node infection tallies."""
    n = out_ptr.size - 1
    st = np.empty(1, np.uint64)
    state = np.zeros(n, np.int8)
    cur = np.empty(n, np.int64)
    nxt = np.empty(n, np.int64)
    touched = np.empty(n, np.int64)
    counts = np.empty(hi - lo, np.int64)
    tally = np.zeros(n, np.int64)
    for i in range(lo, hi):
        st[0] = derive_seed(master, i)
        cnt = _cascade(model, out_ptr, out_dst, out_eid, prob, gamma, horizon, seeds, st,
                       state, cur, nxt, touched)
        counts[i - lo] = cnt
        for j in range(cnt):
            tally[touched[j]] += 1
            state[touched[j]] = 0
    return counts, tally


# ---------------------------------------------------------- live-edge graphs

@njit(cache=True)
def _live_edges(model, out_ptr, out_eid, prob, gamma, horizon, literal, st, span):
    """Fill ``span[e]``: 0 if blocked, else the infection span (1 for IC/SIR)."""
    n = out_ptr.size - 1
    for u in range(n):
        lo = out_ptr[u]
        hi = out_ptr[u + 1]
        if lo == hi:
            continue
        if model == IC:
            for k in range(lo, hi):
                e = out_eid[k]
                span[e] = 1 if uniform(st) < prob[e] else 0
            continue
        cap = FOREVER if model == SIR else horizon
        if literal:
            rec = geometric_by_rounds(st, gamma[u], cap)
        else:
            rec = geometric(st, gamma[u], cap)
        lim = min(rec, cap)
        for k in range(lo, hi):
            e = out_eid[k]
            if literal:
                t = geometric_by_rounds(st, prob[e], lim)
            else:
                t = geometric(st, prob[e], lim)
            if t <= lim:
                span[e] = 1 if model == SIR else t
            else:
                span[e] = 0


@njit(cache=True, nogil=True)
def live_once(model, out_ptr, out_eid, prob, gamma, horizon, literal, seed):
    st = np.empty(1, np.uint64)
    st[0] = np.uint64(seed)
    span = np.zeros(out_eid.size, np.int64)
    _live_edges(model, out_ptr, out_eid, prob, gamma, horizon, literal, st, span)
    return span


@njit(cache=True)
def _reach_count(model, out_ptr, out_dst, out_eid, span, horizon, seeds,
                 dist, wpos, head, enode, enext, touched):
    n = out_ptr.size - 1
    if model != TSIR:
        cnt = 0
        for i in range(seeds.size):
            s = seeds[i]
            if dist[s] != 0:
                dist[s] = 0
                touched[cnt] = s
                cnt += 1
        h = 0
        while h < cnt:
            u = touched[h]
            h += 1
            for k in range(out_ptr[u], out_ptr[u + 1]):
                v = out_dst[k]
                if span[out_eid[k]] > 0 and dist[v] != 0:
                    dist[v] = 0
                    touched[cnt] = v
                    cnt += 1
        for i in range(cnt):
            dist[touched[i]] = _UNSET
        return cnt
    for k in range(out_eid.size):
        wpos[k] = span[out_eid[k]]
    cnt = _dial(out_ptr, out_dst, wpos, seeds, seeds.size, horizon, dist,
                head, enode, enext, touched)
    for i in range(cnt):
        dist[touched[i]] = _UNSET
    return cnt


@njit(cache=True, nogil=True)
def live_chunk(model, out_ptr, out_dst, out_eid, prob, gamma, horizon, literal,
               seeds, probe, master, lo, hi):
    """Per-edge live tallies, reachable counts from ``seeds``, and the live
    pattern (bit ``i`` = ``i``-th out-edge) of node ``probe`` for each sample."""
    n = out_ptr.size - 1
    m = out_eid.size
    st = np.empty(1, np.uint64)
    span = np.zeros(m, np.int64)
    live_tally = np.zeros(m, np.int64)
    reach = np.empty(hi - lo, np.int64)
    patterns = np.zeros(hi - lo, np.int64)
    dist = np.full(n, _UNSET, np.int64)
    wpos = np.empty(m, np.int64)
    bound = max(horizon, 0)
    head = np.empty(bound + 1, np.int64)
    enode = np.empty(m + n + 1, np.int64)
    enext = np.empty(m + n + 1, np.int64)
    touched = np.empty(n, np.int64)
    for i in range(lo, hi):
        st[0] = derive_seed(master, i)
        _live_edges(model, out_ptr, out_eid, prob, gamma, horizon, literal, st, span)
        for e in range(m):
            if span[e] > 0:
                live_tally[e] += 1
        if probe >= 0:
            code = 0
            for k in range(out_ptr[probe], out_ptr[probe + 1]):
                if span[out_eid[k]] > 0:
                    code |= 1 << (k - out_ptr[probe])
            patterns[i - lo] = code
        reach[i - lo] = _reach_count(model, out_ptr, out_dst, out_eid, span, bound, seeds,
                                     dist, wpos, head, enode, enext, touched)
    return live_tally, reach, patterns


# ------------------------------------------------------------ reverse sampling

@njit(cache=True)
def _rr_ic(in_ptr, in_src, in_eid, prob, root, st, mark, members):
    mark[root] = 1
    members[0] = root
    cnt = 1
    work = 0
    h = 0
    while h < cnt:
        u = members[h]
        h += 1
        for k in range(in_ptr[u], in_ptr[u + 1]):
            w = in_src[k]
            if mark[w]:
                continue
            work += 1
            if uniform(st) < prob[in_eid[k]]:
                mark[w] = 1
                members[cnt] = w
                cnt += 1
    return cnt, work


@njit(cache=True)
def _rr_sir(in_ptr, in_src, in_eid, prob, gamma, root, st, mark, members,
            log_q, q_touched, heap):
    """Reverse sampling with sequential conditionals.

    Pending edges ``(u, e)`` into the current set sit in a min-heap keyed
    ``u * m + e``, so the smallest candidate node is served first and its
    edges in index order. A node stops revealing at its first live edge; its
    blocked edges persist in ``log_q[u]`` across visits within the sample.
    """
    m = in_eid.size
    mark[root] = 1
    members[0] = root
    cnt = 1
    nq = 0
    size = 0
    work = 0
    for k in range(in_ptr[root], in_ptr[root + 1]):
        size = _heap_push(heap, size, in_src[k] * m + in_eid[k])
    while size > 0:
        key, size = _heap_pop(heap, size)
        u = key // m
        if mark[u]:
            continue
        e = key - u * m
        work += 1
        if uniform(st) < live_given_blocked(prob[e], gamma[u], log_q[u]):
            mark[u] = 1
            members[cnt] = u
            cnt += 1
            for k in range(in_ptr[u], in_ptr[u + 1]):
                w = in_src[k]
                if not mark[w]:
                    size = _heap_push(heap, size, w * m + in_eid[k])
        else:
            if log_q[u] == 0.0:
                q_touched[nq] = u
                nq += 1
            log_q[u] += np.log1p(-prob[e])
    for i in range(nq):
        log_q[q_touched[i]] = 0.0
    return cnt, work


@njit(cache=True)
def _rr_tsir(in_ptr, in_src, in_eid, prob, gamma, horizon, literal, root, st, mark,
             members, rec, r_touched, e_src, e_dst, e_span, local, lptr, ladj, lw,
             dist, head, enode, enext, touched):
    """Reverse exploration recording edges with infection spans, then keep the
    members within span-weighted distance ``horizon`` of the root."""
    T = horizon
    mark[root] = 1
    members[0] = root
    cnt = 1
    nr = 0
    ne = 0
    work = 0
    h = 0
    dist[0] = 0   # hop depth per member slot until the final pass
    while h < cnt:
        u = members[h]
        depth = dist[h]
        h += 1
        if depth >= T:
            continue   # every path through u already needs more than T rounds
        for k in range(in_ptr[u], in_ptr[u + 1]):
            w = in_src[k]
            work += 1
            if rec[w] == 0:
                if literal:
                    rec[w] = geometric_by_rounds(st, gamma[w], T)
                else:
                    rec[w] = geometric(st, gamma[w], T)
                r_touched[nr] = w
                nr += 1
            lim = min(rec[w], T)
            if literal:
                t = geometric_by_rounds(st, prob[in_eid[k]], lim)
            else:
                t = geometric(st, prob[in_eid[k]], lim)
            if t <= lim:
                e_src[ne] = w
                e_dst[ne] = u
                e_span[ne] = t
                ne += 1
                if not mark[w]:
                    mark[w] = 1
                    members[cnt] = w
                    dist[cnt] = depth + 1
                    cnt += 1
    for i in range(nr):
        rec[r_touched[i]] = 0
    # reversed recorded edges as local CSR keyed by the edge head
    for i in range(cnt):
        local[members[i]] = i
        lptr[i + 1] = 0
    lptr[0] = 0
    for j in range(ne):
        lptr[local[e_dst[j]] + 1] += 1
    for i in range(cnt):
        lptr[i + 1] += lptr[i]
    for j in range(ne):
        slot = local[e_dst[j]]
        pos = lptr[slot]
        ladj[pos] = local[e_src[j]]
        lw[pos] = e_span[j]
        lptr[slot] = pos + 1
    for i in range(cnt, 0, -1):
        lptr[i] = lptr[i - 1]
    lptr[0] = 0
    for i in range(cnt):
        dist[i] = _UNSET
        mark[members[i]] = 0
    src0 = np.zeros(1, np.int64)
    _dial(lptr, ladj, lw, src0, 1, T, dist, head, enode, enext, touched)
    kept = 0
    for i in range(cnt):
        if dist[i] <= T:
            members[kept] = members[i]
            kept += 1
    return kept, work


@njit(cache=True, nogil=True)
def rr_chunk(model, in_ptr, in_src, in_eid, prob, gamma, horizon, literal, fixed_root,
             master, lo, hi):
    """RR sets for sample indices ``lo..hi-1``.

    Returns the concatenated members, per-set sizes, roots and work counts.
    ``fixed_root < 0`` draws each root uniformly.
    """
    n = in_ptr.size - 1
    m = in_eid.size
    st = np.empty(1, np.uint64)
    mark = np.zeros(n, np.uint8)
    members = np.empty(n, np.int64)
    log_q = np.zeros(n)
    q_touched = np.empty(m + 1, np.int64)
    heap = np.empty(m + 1, np.int64)
    T = max(horizon, 0)
    tsir = model == TSIR
    mt = m if tsir else 0
    nt = n if tsir else 1
    rec = np.zeros(nt, np.int64)
    r_touched = np.empty(nt, np.int64)
    e_src = np.empty(mt, np.int64)
    e_dst = np.empty(mt, np.int64)
    e_span = np.empty(mt, np.int64)
    local = np.empty(nt, np.int64)
    lptr = np.zeros(nt + 1, np.int64)
    ladj = np.empty(mt, np.int64)
    lw = np.empty(mt, np.int64)
    dist = np.empty(nt, np.int64)
    head = np.empty(T + 1 if tsir else 0, np.int64)
    enode = np.empty(mt + 1, np.int64)
    enext = np.empty(mt + 1, np.int64)
    touched = np.empty(nt, np.int64)

    count = hi - lo
    sizes = np.empty(count, np.int64)
    roots = np.empty(count, np.int64)
    works = np.empty(count, np.int64)
    cap = max(16, 4 * count)
    buf = np.empty(cap, np.int32)
    used = 0
    for i in range(lo, hi):
        st[0] = derive_seed(master, i)
        if fixed_root >= 0:
            root = fixed_root
        else:
            root = min(np.int64(uniform(st) * n), n - 1)
        if model == IC:
            cnt, work = _rr_ic(in_ptr, in_src, in_eid, prob, root, st, mark, members)
            for j in range(cnt):
                mark[members[j]] = 0
        elif model == SIR:
            cnt, work = _rr_sir(in_ptr, in_src, in_eid, prob, gamma, root, st, mark, members,
                                log_q, q_touched, heap)
            for j in range(cnt):
                mark[members[j]] = 0
        else:
            cnt, work = _rr_tsir(in_ptr, in_src, in_eid, prob, gamma, T, literal, root, st,
                                 mark, members, rec, r_touched, e_src, e_dst, e_span, local,
                                 lptr, ladj, lw, dist, head, enode, enext, touched)
        if used + cnt > cap:
            cap = max(2 * cap, used + cnt)
            grown = np.empty(cap, np.int32)
            grown[:used] = buf[:used]
            buf = grown
        for j in range(cnt):
            buf[used + j] = members[j]
        used += cnt
        sizes[i - lo] = cnt
        roots[i - lo] = root
        works[i - lo] = work
    return buf[:used].copy(), sizes, roots, works


# ------------------------------------------------------------------ coupling

@njit(cache=True)
def _append(buf, used, x):
    if used == buf.size:
        grown = np.empty(2 * buf.size + 16, buf.dtype)
        grown[:used] = buf[:used]
        buf = grown
    buf[used] = x
    return buf, used + 1


@njit(cache=True, nogil=True)
def couple_chunk(in_ptr, in_src, in_eid, beta, gamma, p_ic, fixed_root, master, lo, hi):
    """Paired IC/SIR reverse samples driven by one uniform per revealed edge.

    Per sample, flat outputs hold RR2 (SIR), RR1 (IC), E1, E2 and the
    revealed edges in reveal order; ``*_n`` arrays give per-sample lengths.
    ``violations`` counts samples where some RR2 node is missing from RR1.
    """
    n = in_ptr.size - 1
    m = in_eid.size
    st = np.empty(1, np.uint64)
    mark2 = np.zeros(n, np.uint8)
    mark1 = np.zeros(n, np.uint8)
    rr2 = np.empty(n, np.int64)
    rr1 = np.empty(n, np.int64)
    log_q = np.zeros(n)
    q_touched = np.empty(m + 1, np.int64)
    heap = np.empty(m + 1, np.int64)

    count = hi - lo
    roots = np.empty(count, np.int64)
    n_rr2 = np.empty(count, np.int64)
    n_rr1 = np.empty(count, np.int64)
    n_e1 = np.empty(count, np.int64)
    n_e2 = np.empty(count, np.int64)
    n_rev = np.empty(count, np.int64)
    f_rr2 = np.empty(4 * count + 16, np.int64)
    f_rr1 = np.empty(4 * count + 16, np.int64)
    f_e1 = np.empty(4 * count + 16, np.int64)
    f_e2 = np.empty(4 * count + 16, np.int64)
    f_rev = np.empty(4 * count + 16, np.int64)
    u_rr2 = 0
    u_rr1 = 0
    u_e1 = 0
    u_e2 = 0
    u_rev = 0
    violations = 0
    for i in range(lo, hi):
        st[0] = derive_seed(master, i)
        if fixed_root >= 0:
            root = fixed_root
        else:
            root = min(np.int64(uniform(st) * n), n - 1)
        mark2[root] = 1
        mark1[root] = 1
        rr2[0] = root
        rr1[0] = root
        c2 = 1
        c1 = 1
        e1_start = u_e1
        e2_start = u_e2
        rev_start = u_rev
        nq = 0
        size = 0
        for k in range(in_ptr[root], in_ptr[root + 1]):
            size = _heap_push(heap, size, in_src[k] * m + in_eid[k])
        while size > 0:
            key, size = _heap_pop(heap, size)
            u = key // m
            if mark2[u]:
                continue
            e = key - u * m
            f_rev, u_rev = _append(f_rev, u_rev, e)
            x = uniform(st)
            if x < p_ic[e]:
                if not mark1[u]:
                    mark1[u] = 1
                    rr1[c1] = u
                    c1 += 1
                f_e1, u_e1 = _append(f_e1, u_e1, e)
            if x < live_given_blocked(beta[e], gamma[u], log_q[u]):
                mark2[u] = 1
                rr2[c2] = u
                c2 += 1
                f_e2, u_e2 = _append(f_e2, u_e2, e)
                for k in range(in_ptr[u], in_ptr[u + 1]):
                    w = in_src[k]
                    if not mark2[w]:
                        size = _heap_push(heap, size, w * m + in_eid[k])
            else:
                if log_q[u] == 0.0:
                    q_touched[nq] = u
                    nq += 1
                log_q[u] += np.log1p(-beta[e])
        bad = False
        for j in range(c2):
            if not mark1[rr2[j]]:
                bad = True
        if bad:
            violations += 1
        for j in range(c2):
            f_rr2, u_rr2 = _append(f_rr2, u_rr2, rr2[j])
            mark2[rr2[j]] = 0
        for j in range(c1):
            f_rr1, u_rr1 = _append(f_rr1, u_rr1, rr1[j])
            mark1[rr1[j]] = 0
        for j in range(nq):
            log_q[q_touched[j]] = 0.0
        roots[i - lo] = root
        n_rr2[i - lo] = c2
        n_rr1[i - lo] = c1
        n_e1[i - lo] = u_e1 - e1_start
        n_e2[i - lo] = u_e2 - e2_start
        n_rev[i - lo] = u_rev - rev_start
    return (roots, f_rr2[:u_rr2].copy(), n_rr2, f_rr1[:u_rr1].copy(), n_rr1,
            f_e1[:u_e1].copy(), n_e1, f_e2[:u_e2].copy(), n_e2,
            f_rev[:u_rev].copy(), n_rev, violations)


# ------------------------------------------------------------ greedy coverage

@njit(cache=True)
def greedy_cover(n, k, node_ptr, node_sets, set_ptr, set_members, lazy):
    """Greedy max coverage; ties go to the smallest node id.

    Marginal gains (uncovered sets containing a node) are kept exact by
    decrementing them as sets become covered. The lazy variant keeps stale
    upper bounds in a heap keyed ``(nsets - gain) * n + node`` and only
    re-inserts a popped node when its bound is out of date.
    Returns seeds, per-step gains, and whether the gains were non-increasing.
    """
    nsets = set_ptr.size - 1
    gain = np.empty(n, np.int64)
    for v in range(n):
        gain[v] = node_ptr[v + 1] - node_ptr[v]
    covered = np.zeros(nsets, np.uint8)
    chosen = np.zeros(n, np.uint8)
    seeds = np.empty(min(k, n), np.int64)
    gains = np.empty(min(k, n), np.int64)
    picked = 0
    total = 0
    monotone = True
    heap = np.empty(n, np.int64)
    size = 0
    if lazy:
        for v in range(n):
            size = _heap_push(heap, size, (nsets - gain[v]) * n + v)
    while picked < k and picked < n and total < nsets:
        if lazy:
            best = -1
            while size > 0:
                key, size = _heap_pop(heap, size)
                v = key % n
                stale = nsets - key // n
                if stale == gain[v]:
                    best = v
                    break
                size = _heap_push(heap, size, (nsets - gain[v]) * n + v)
            if best < 0:
                break
        else:
            best = -1
            bg = -1
            for v in range(n):
                if not chosen[v] and gain[v] > bg:
                    bg = gain[v]
                    best = v
            if best < 0:
                break
        g = gain[best]
        if picked > 0 and g > gains[picked - 1]:
            monotone = False
        chosen[best] = 1
        seeds[picked] = best
        gains[picked] = g
        picked += 1
        total += g
        for j in range(node_ptr[best], node_ptr[best + 1]):
            s = node_sets[j]
            if covered[s]:
                continue
            covered[s] = 1
            for t in range(set_ptr[s], set_ptr[s + 1]):
                gain[set_members[t]] -= 1
    return seeds[:picked].copy(), gains[:picked].copy(), monotone
