"""Numba kernels for tour geometry, exact/heuristic TSP, and bulk lookahead expansion.

Everything here works in city *row* space (positions of POIs in the city's
array order), not id space; callers translate. Tours are int64 arrays whose
first `n` entries are valid.

Slot convention shared by insertion kernels and their test oracles:
inserting at slot k places the new point before position k, i.e.
``order[:k] + [q] + order[k:]``. Closed tours use slots 1..n (each cycle gap
exactly once), scanned ascending. Open tours use slots 0..n where 0 prepends
and n appends; end slots score the angle with the two nearest tour points and
are scanned after the interior slots. The first slot attaining the best score
wins, which makes ties deterministic.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def tour_len(order, n, D, closed):
    total = 0.0
    for i in range(n - 1):
        total += D[order[i], order[i + 1]]
    if closed and n >= 2:
        total += D[order[n - 1], order[0]]
    return total


@njit(cache=True)
def _cos_at(qx, qy, ax, ay, bx, by):
    # cosine of the angle at q in triangle (a, q, b); coincident points
    # count as a straight-line (angle pi) slot so zero-detour insertions win
    vax = ax - qx
    vay = ay - qy
    vbx = bx - qx
    vby = by - qy
    na2 = vax * vax + vay * vay
    nb2 = vbx * vbx + vby * vby
    if na2 < 1e-24 or nb2 < 1e-24:
        return -1.0
    return (vax * vbx + vay * vby) / np.sqrt(na2 * nb2)


@njit(cache=True)
def max_angle_slot(order, n, xs, ys, D, q, closed):
    """Best insertion slot for q by the largest-angle criterion.

    Returns (slot, walk_delta_km) where walk_delta is the tour-length change
    of inserting at that slot.
    """
    if n == 0:
        return 0, 0.0
    if n == 1:
        if closed:
            return 1, 2.0 * D[order[0], q]
        return 1, D[order[0], q]
    qx = xs[q]
    qy = ys[q]
    best_slot = -1
    best_cos = 2.0
    if closed:
        for k in range(1, n + 1):
            a = order[k - 1]
            b = order[k % n]
            c = _cos_at(qx, qy, xs[a], ys[a], xs[b], ys[b])
            if c < best_cos:
                best_cos = c
                best_slot = k
        a = order[best_slot - 1]
        b = order[best_slot % n]
        return best_slot, D[a, q] + D[q, b] - D[a, b]
    # open tours: interior slots scanned first, then prepend, then append, so
    # a point collinear between two tour points goes between them on ties
    for k in range(1, n):
        a = order[k - 1]
        b = order[k]
        c = _cos_at(qx, qy, xs[a], ys[a], xs[b], ys[b])
        if c < best_cos:
            best_cos = c
            best_slot = k
    c = _cos_at(qx, qy, xs[order[0]], ys[order[0]], xs[order[1]], ys[order[1]])
    if c < best_cos:
        best_cos = c
        best_slot = 0
    c = _cos_at(qx, qy, xs[order[n - 2]], ys[order[n - 2]], xs[order[n - 1]], ys[order[n - 1]])
    if c < best_cos:
        best_cos = c
        best_slot = n
    if best_slot == 0:
        delta = D[q, order[0]]
    elif best_slot == n:
        delta = D[order[n - 1], q]
    else:
        a = order[best_slot - 1]
        b = order[best_slot]
        delta = D[a, q] + D[q, b] - D[a, b]
    return best_slot, delta


@njit(cache=True)
def remove_walk_delta(order, n, pos, D, closed):
    """Tour-length change from deleting position pos, order preserved."""
    if n <= 1:
        return 0.0
    p = order[pos]
    if closed:
        a = order[(pos - 1) % n]
        b = order[(pos + 1) % n]
        return D[a, b] - D[a, p] - D[p, b]
    if pos == 0:
        return -D[p, order[1]]
    if pos == n - 1:
        return -D[order[n - 2], p]
    a = order[pos - 1]
    b = order[pos + 1]
    return D[a, b] - D[a, p] - D[p, b]


@njit(cache=True)
def cheapest_insertion_delta(order, n, D, q, closed):
    """Smallest tour-length increase over all slots (upper-bounds the optimal
    re-route after adding q)."""
    if n == 0:
        return 0.0
    if n == 1:
        return 2.0 * D[order[0], q] if closed else D[order[0], q]
    best = 1e18
    if closed:
        for k in range(1, n + 1):
            a = order[k - 1]
            b = order[k % n]
            d = D[a, q] + D[q, b] - D[a, b]
            if d < best:
                best = d
    else:
        if D[q, order[0]] < best:
            best = D[q, order[0]]
        if D[order[n - 1], q] < best:
            best = D[order[n - 1], q]
        for k in range(1, n):
            a = order[k - 1]
            b = order[k]
            d = D[a, q] + D[q, b] - D[a, b]
            if d < best:
                best = d
    return best


@njit(cache=True)
def nn_order(D, rows, start_pos):
    """Greedy nearest-neighbor chain over `rows` starting at rows[start_pos]."""
    n = rows.shape[0]
    order = np.empty(n, np.int64)
    used = np.zeros(n, np.bool_)
    cur = start_pos
    used[cur] = True
    order[0] = rows[cur]
    for step in range(1, n):
        best = -1
        bd = 1e18
        for j in range(n):
            if not used[j]:
                d = D[rows[cur], rows[j]]
                if d < bd:
                    bd = d
                    best = j
        used[best] = True
        order[step] = rows[best]
        cur = best
    return order


@njit(cache=True)
def two_opt(order, n, D, closed):
    """Segment-reversal local search, in place, to a 2-opt local optimum.

    Deterministic scan order; strict improvement threshold avoids float
    cycling. Never worsens the input order.
    """
    if n < 3:
        return
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                if closed and i == 0 and j == n - 1:
                    continue
                oi = order[i]
                oj = order[j]
                delta = 0.0
                if i > 0 or closed:
                    pi = order[(i - 1) % n]
                    delta += D[pi, oj] - D[pi, oi]
                if j < n - 1 or closed:
                    nj = order[(j + 1) % n]
                    delta += D[oi, nj] - D[oj, nj]
                if delta < -1e-12:
                    lo = i
                    hi = j
                    while lo < hi:
                        tmp = order[lo]
                        order[lo] = order[hi]
                        order[hi] = tmp
                        lo += 1
                        hi -= 1
                    improved = True


@njit(cache=True)
def held_karp(D, rows, closed):
    """Exact minimum-length order over `rows` by subset dynamic programming.

    Open mode: free endpoints. Closed mode: a cycle, anchored at rows[0]
    (pass rows sorted for a canonical orientation). Ties resolve to the
    first-found optimum, so results are deterministic.
    """
    n = rows.shape[0]
    order = np.empty(n, np.int64)
    if n == 0:
        return order
    if n == 1:
        order[0] = rows[0]
        return order
    full = (1 << n) - 1
    INF = 1e18
    dp = np.full((full + 1, n), INF)
    parent = np.full((full + 1, n), -1, np.int64)
    if closed:
        dp[1, 0] = 0.0
    else:
        for i in range(n):
            dp[1 << i, i] = 0.0
    for mask in range(1, full + 1):
        if closed and not (mask & 1):
            continue
        for j in range(n):
            if not (mask >> j) & 1:
                continue
            cur = dp[mask, j]
            if cur >= INF:
                continue
            for k in range(n):
                if (mask >> k) & 1:
                    continue
                nm = mask | (1 << k)
                nd = cur + D[rows[j], rows[k]]
                if nd < dp[nm, k]:
                    dp[nm, k] = nd
                    parent[nm, k] = j
    best = INF
    end = -1
    for j in range(n):
        if closed and j == 0:
            continue
        total = dp[full, j] + (D[rows[j], rows[0]] if closed else 0.0)
        if total < best:
            best = total
            end = j
    mask = full
    j = end
    for pos in range(n - 1, -1, -1):
        order[pos] = rows[j]
        pj = parent[mask, j]
        mask ^= 1 << j
        j = pj
    return order


@njit(cache=True)
def expand_level(tours, lens, feats, vis, xs, ys, D, dur, cost, cat,
                 budget, speed, closed,
                 out_tours, out_lens, out_feats, out_vis, out_counts):
    """One subjective step from every node: NoOp child first, then adds that
    fit the budget under the imagined (max-angle) insertion, then removals.

    feats columns are [hours per category (K), walking hours, total cost];
    vis holds total visit hours so the budget check is O(1) per child.
    Returns the number of children written.
    """
    n_nodes = tours.shape[0]
    n_pois = xs.shape[0]
    K = feats.shape[1] - 2
    w = 0
    for i in range(n_nodes):
        ln = lens[i]
        in_tour = np.zeros(n_pois, np.bool_)
        for t in range(ln):
            in_tour[tours[i, t]] = True
        cnt = 0
        # NoOp
        for t in range(ln):
            out_tours[w, t] = tours[i, t]
        out_lens[w] = ln
        out_feats[w] = feats[i]
        out_vis[w] = vis[i]
        w += 1
        cnt += 1
        # adds
        for q in range(n_pois):
            if in_tour[q]:
                continue
            slot, delta = max_angle_slot(tours[i], ln, xs, ys, D, q, closed)
            walk2 = feats[i, K] + delta / speed
            vis2 = vis[i] + dur[q]
            if walk2 + vis2 > budget + 1e-9:
                continue
            for t in range(slot):
                out_tours[w, t] = tours[i, t]
            out_tours[w, slot] = q
            for t in range(slot, ln):
                out_tours[w, t + 1] = tours[i, t]
            out_lens[w] = ln + 1
            out_feats[w] = feats[i]
            out_feats[w, cat[q]] += dur[q]
            out_feats[w, K] = walk2
            out_feats[w, K + 1] = feats[i, K + 1] + cost[q]
            out_vis[w] = vis2
            w += 1
            cnt += 1
        # removals (always fit: duration only shrinks)
        for pos in range(ln):
            p = tours[i, pos]
            delta = remove_walk_delta(tours[i], ln, pos, D, closed)
            for t in range(pos):
                out_tours[w, t] = tours[i, t]
            for t in range(pos + 1, ln):
                out_tours[w, t - 1] = tours[i, t]
            out_lens[w] = ln - 1
            out_feats[w] = feats[i]
            out_feats[w, cat[p]] -= dur[p]
            out_feats[w, K] = feats[i, K] + delta / speed
            out_feats[w, K + 1] = feats[i, K + 1] - cost[p]
            out_vis[w] = vis[i] - dur[p]
            w += 1
            cnt += 1
        out_counts[i] = cnt
    return w


@njit(cache=True)
def expand_leaf_features(tours, lens, feats, vis, xs, ys, D, dur, cost, cat,
                         budget, speed, closed,
                         out_feats, out_counts):
    """Like expand_level but children are leaves: only features are emitted."""
    n_nodes = tours.shape[0]
    n_pois = xs.shape[0]
    K = feats.shape[1] - 2
    w = 0
    for i in range(n_nodes):
        ln = lens[i]
        in_tour = np.zeros(n_pois, np.bool_)
        for t in range(ln):
            in_tour[tours[i, t]] = True
        cnt = 0
        out_feats[w] = feats[i]
        w += 1
        cnt += 1
        for q in range(n_pois):
            if in_tour[q]:
                continue
            _, delta = max_angle_slot(tours[i], ln, xs, ys, D, q, closed)
            walk2 = feats[i, K] + delta / speed
            if walk2 + vis[i] + dur[q] > budget + 1e-9:
                continue
            out_feats[w] = feats[i]
            out_feats[w, cat[q]] += dur[q]
            out_feats[w, K] = walk2
            out_feats[w, K + 1] = feats[i, K + 1] + cost[q]
            w += 1
            cnt += 1
        for pos in range(ln):
            p = tours[i, pos]
            delta = remove_walk_delta(tours[i], ln, pos, D, closed)
            out_feats[w] = feats[i]
            out_feats[w, cat[p]] -= dur[p]
            out_feats[w, K] = feats[i, K] + delta / speed
            out_feats[w, K + 1] = feats[i, K + 1] - cost[p]
            w += 1
            cnt += 1
        out_counts[i] = cnt
    return w
