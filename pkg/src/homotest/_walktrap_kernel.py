"""Compiled agglomeration loop for random-walk community detection.

Communities are merged greedily by the smallest increase in mean squared
walk-profile distance. Profiles are pre-scaled by 1/sqrt(degree), so all
distances are plain squared Euclidean. A pair cost between a freshly
merged community and a neighbor adjacent to both parents uses the O(1)
Lance-Williams style update; a neighbor of one parent only gets a direct
profile distance. Pair costs never change after creation (merges only
create pairs involving the new community), so the heap needs lazy
deletion only for pairs whose endpoint died.

Adjacency lists live in one flat arena (ids, costs, edge counts) with
per-community start/used/cap. Blocks are bump-allocated and relocated
with doubled capacity when they overflow; new community ids only grow,
so appends keep every list sorted by id, and a merged community's list
is the two-pointer union of its parents' live entries.

Ids: 0..n_sub-1 are singleton communities; merge j creates id n_sub + j.
"""

import numpy as np
from numba import njit


# 4-ary min-heap over (cost, packed pair). The pair (a, b) with a < b is
# packed as a*2^32 + b, so integer order on the payload matches
# lexicographic order on (a, b) and settles cost ties deterministically.


@njit(cache=True, inline="always")
def _sift_up(hk, hp, i):
    while i > 0:
        p = (i - 1) >> 2
        if hk[i] < hk[p] or (hk[i] == hk[p] and hp[i] < hp[p]):
            hk[i], hk[p] = hk[p], hk[i]
            hp[i], hp[p] = hp[p], hp[i]
            i = p
        else:
            break


@njit(cache=True, inline="always")
def _sift_down(hk, hp, n, i):
    while True:
        c0 = 4 * i + 1
        if c0 >= n:
            break
        end = c0 + 4
        if end > n:
            end = n
        c = c0
        for j in range(c0 + 1, end):
            if hk[j] < hk[c] or (hk[j] == hk[c] and hp[j] < hp[c]):
                c = j
        if hk[c] < hk[i] or (hk[c] == hk[i] and hp[c] < hp[i]):
            hk[i], hk[c] = hk[c], hk[i]
            hp[i], hp[c] = hp[c], hp[i]
            i = c
        else:
            break


@njit(cache=True)
def _heap_pop(hk, hp, hsize):
    """Remove the root; caller read it beforehand. Returns the new size."""
    last = hsize - 1
    hk[0] = hk[last]
    hp[0] = hp[last]
    _sift_down(hk, hp, last, 0)
    return last


@njit(cache=True, fastmath={"reassoc", "contract"})
def agglomerate(n_sub, e0, e1, w, sq, deg_sub, gram, use_gram):
    """Run the full greedy merge sequence.

    Parameters
    ----------
    n_sub : int
        Number of non-isolated nodes (subgraph numbering 0..n_sub-1).
    e0, e1 : int64 arrays
        Subgraph edges, e0 < e1 elementwise, lexicographically sorted.
    w : (n_sub, n_sub) float64
        t-step walk distributions pre-scaled by 1/sqrt(degree) per column.
        Pass a (0, 0) array when ``use_gram`` is set.
    sq : float64 array
        Squared row norms of w.
    deg_sub : float64 array
        Degrees of the subgraph nodes.
    gram : (n_sub, n_sub) float64
        Pairwise dot products of the rows of w. With it, every direct
        profile distance is O(1): community-mean dot products follow the
        merge recursion ``g(c,x) = wa*g(a,x) + wb*g(b,x)``, maintained by
        one row combine plus a column mirror per merge. Slots of dead
        communities are reused, so the matrix never grows. Pass a (0, 0)
        array when ``use_gram`` is unset (large graphs, where computing
        the full gram would cost more than the in-loop distances).
    use_gram : bool
        Select the gram strategy.

    Returns
    -------
    ma, mb : merged community ids per step (merge j creates n_sub + j)
    eab : edge count between the merged pair
    sab : product of the merged pair's sizes
    dprod : product of the merged pair's total degrees
    mcost : merge cost per step
    """
    m0 = e0.shape[0]
    max_id = 2 * n_sub - 1
    alive = np.ones(max_id, np.uint8)
    alive[n_sub:] = 0
    sizes = np.zeros(max_id, np.int64)
    sizes[:n_sub] = 1
    dtot = np.zeros(max_id, np.float64)
    dtot[:n_sub] = deg_sub
    if use_gram:
        vecs = np.zeros((1, 1), np.float64)
        slot = np.empty(max_id, np.int64)
        for i in range(n_sub):
            slot[i] = i
        sqn = np.zeros(max_id, np.float64)
        sqn[:n_sub] = sq
    else:
        vecs = np.zeros((max_id, n_sub), np.float64)
        vecs[:n_sub, :] = w
        slot = np.empty(1, np.int64)
        sqn = np.zeros(1, np.float64)
    inv_n = 1.0 / n_sub

    # arena-backed adjacency lists
    deg_cnt = np.zeros(n_sub, np.int64)
    for k in range(m0):
        deg_cnt[e0[k]] += 1
        deg_cnt[e1[k]] += 1
    start = np.zeros(max_id, np.int64)
    used = np.zeros(max_id, np.int64)
    cap = np.zeros(max_id, np.int64)
    tail = 0
    for i in range(n_sub):
        start[i] = tail
        cap[i] = deg_cnt[i] + 2
        tail += cap[i]
    acap = 2 * tail + 64
    aid = np.empty(acap, np.int64)
    ads = np.empty(acap, np.float64)
    aec = np.empty(acap, np.int64)

    hcap = m0 + 64
    hk = np.empty(hcap, np.float64)
    hp = np.empty(hcap, np.int64)
    hsize = m0

    for k in range(m0):
        i = e0[k]
        j = e1[k]
        if use_gram:
            dot = gram[i, j]
        else:
            dot = 0.0
            for k2 in range(n_sub):
                dot += w[i, k2] * w[j, k2]
        r2 = sq[i] + sq[j] - 2.0 * dot
        if r2 < 0.0:
            r2 = 0.0
        d = 0.5 * inv_n * r2
        pi = start[i] + used[i]
        aid[pi] = j
        ads[pi] = d
        aec[pi] = 1
        used[i] += 1
        pj = start[j] + used[j]
        aid[pj] = i
        ads[pj] = d
        aec[pj] = 1
        used[j] += 1
        hk[k] = d
        hp[k] = (i << 32) | j

    # Floyd heapify: O(m) instead of m sift-ups
    for i in range((m0 - 2) >> 2, -1, -1):
        _sift_down(hk, hp, m0, i)

    cap_m = n_sub - 1
    ma = np.empty(cap_m, np.int64)
    mb = np.empty(cap_m, np.int64)
    eab = np.empty(cap_m, np.int64)
    sab = np.empty(cap_m, np.int64)
    dprod = np.empty(cap_m, np.float64)
    mcost = np.empty(cap_m, np.float64)
    n_merges = 0
    next_id = n_sub

    while hsize > 0:
        d = hk[0]
        pair = hp[0]
        a = pair >> 32
        b = pair & 0xFFFFFFFF
        hsize = _heap_pop(hk, hp, hsize)
        if alive[a] == 0 or alive[b] == 0:
            continue
        c = next_id
        next_id += 1
        alive[a] = 0
        alive[b] = 0
        alive[c] = 1
        sa = sizes[a]
        sb = sizes[b]
        sc = sa + sb
        sizes[c] = sc
        dtot[c] = dtot[a] + dtot[b]
        wa = sa / sc
        wb = sb / sc
        if use_gram:
            ra = slot[a]
            rb = slot[b]
            gab = gram[ra, rb]
            sqn[c] = wa * wa * sqn[a] + 2.0 * wa * wb * gab + wb * wb * sqn[b]
            # combine parent rows in place into a's slot, then mirror the
            # column so future row combines see c's entries
            for s in range(n_sub):
                gram[ra, s] = wa * gram[ra, s] + wb * gram[rb, s]
            for s in range(n_sub):
                gram[s, ra] = gram[ra, s]
            slot[c] = ra
        else:
            for k2 in range(n_sub):
                vecs[c, k2] = wa * vecs[a, k2] + wb * vecs[b, k2]

        sa_off = start[a]
        sb_off = start[b]
        len_a = used[a]
        len_b = used[b]

        # block for c: union bound plus append slack
        need = len_a + len_b + 8
        if tail + need > acap:
            while tail + need > acap:
                acap *= 2
            t1 = np.empty(acap, np.int64)
            t2 = np.empty(acap, np.float64)
            t3 = np.empty(acap, np.int64)
            t1[:tail] = aid[:tail]
            t2[:tail] = ads[:tail]
            t3[:tail] = aec[:tail]
            aid, ads, aec = t1, t2, t3
        start[c] = tail
        cap[c] = need
        tail += need
        co = start[c]
        no = 0
        e_between = 0
        ia = 0
        ib = 0
        while ia < len_a or ib < len_b:
            xa = aid[sa_off + ia] if ia < len_a else max_id
            xb = aid[sb_off + ib] if ib < len_b else max_id
            if xa == xb:
                x = xa
                if alive[x] == 1:
                    sx = sizes[x]
                    dnew = (
                        (sa + sx) * ads[sa_off + ia]
                        + (sb + sx) * ads[sb_off + ib]
                        - sx * d
                    ) / (sc + sx)
                    aid[co + no] = x
                    ads[co + no] = dnew
                    aec[co + no] = aec[sa_off + ia] + aec[sb_off + ib]
                    no += 1
                ia += 1
                ib += 1
            elif xa < xb:
                x = xa
                if x == b:
                    e_between = aec[sa_off + ia]
                elif alive[x] == 1:
                    sx = sizes[x]
                    if use_gram:
                        r2 = sqn[c] + sqn[x] - 2.0 * gram[slot[c], slot[x]]
                        if r2 < 0.0:
                            r2 = 0.0
                    else:
                        r2 = 0.0
                        for k2 in range(n_sub):
                            diff = vecs[c, k2] - vecs[x, k2]
                            r2 += diff * diff
                    aid[co + no] = x
                    ads[co + no] = inv_n * (sc * sx) / (sc + sx) * r2
                    aec[co + no] = aec[sa_off + ia]
                    no += 1
                ia += 1
            else:
                x = xb
                if x != a and alive[x] == 1:
                    sx = sizes[x]
                    if use_gram:
                        r2 = sqn[c] + sqn[x] - 2.0 * gram[slot[c], slot[x]]
                        if r2 < 0.0:
                            r2 = 0.0
                    else:
                        r2 = 0.0
                        for k2 in range(n_sub):
                            diff = vecs[c, k2] - vecs[x, k2]
                            r2 += diff * diff
                    aid[co + no] = x
                    ads[co + no] = inv_n * (sc * sx) / (sc + sx) * r2
                    aec[co + no] = aec[sb_off + ib]
                    no += 1
                ib += 1
        used[c] = no

        ma[n_merges] = a
        mb[n_merges] = b
        eab[n_merges] = e_between
        sab[n_merges] = sa * sb
        dprod[n_merges] = dtot[a] * dtot[b]
        mcost[n_merges] = d
        n_merges += 1

        if hsize + no > hcap:
            while hsize + no > hcap:
                hcap *= 2
            t4 = np.empty(hcap, np.float64)
            t5 = np.empty(hcap, np.int64)
            t4[:hsize] = hk[:hsize]
            t5[:hsize] = hp[:hsize]
            hk, hp = t4, t5

        for idx in range(no):
            x = aid[co + idx]
            dx = ads[co + idx]
            ex = aec[co + idx]
            # append (c, ...) to x's list; c is the largest id so far
            if used[x] >= cap[x]:
                newcap = 2 * cap[x] + 4
                if tail + newcap > acap:
                    while tail + newcap > acap:
                        acap *= 2
                    t1 = np.empty(acap, np.int64)
                    t2 = np.empty(acap, np.float64)
                    t3 = np.empty(acap, np.int64)
                    t1[:tail] = aid[:tail]
                    t2[:tail] = ads[:tail]
                    t3[:tail] = aec[:tail]
                    aid, ads, aec = t1, t2, t3
                    dx = ads[co + idx]
                    ex = aec[co + idx]
                    x = aid[co + idx]
                old = start[x]
                for q in range(used[x]):
                    aid[tail + q] = aid[old + q]
                    ads[tail + q] = ads[old + q]
                    aec[tail + q] = aec[old + q]
                start[x] = tail
                cap[x] = newcap
                tail += newcap
            px = start[x] + used[x]
            aid[px] = c
            ads[px] = dx
            aec[px] = ex
            used[x] += 1
            hk[hsize] = dx
            hp[hsize] = (x << 32) | c
            _sift_up(hk, hp, hsize)
            hsize += 1

    return (
        ma[:n_merges],
        mb[:n_merges],
        eab[:n_merges],
        sab[:n_merges],
        dprod[:n_merges],
        mcost[:n_merges],
    )
