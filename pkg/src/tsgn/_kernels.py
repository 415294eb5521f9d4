"""Hot numeric kernels, each in a numba @njit form and a numpy fallback.

Every public wrapper dispatches on the active backend (see ``accel``). The
two forms of each kernel emit results in the same order, so graph transforms
and tree fits are backend-independent; floating-point accumulations may
differ in the last ulps where summation order differs (betweenness, power
iteration, skipgram).

All kernels operate on flat int64/float64 arrays: edge-id groups with CSR
style offsets, or adjacency in CSR (indices sorted within each row).
"""

from __future__ import annotations

import numpy as np

from . import accel

if accel.HAS_NUMBA:
    from numba import njit
else:  # pragma: no cover - numba is a declared dependency

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap(args[0]) if args and callable(args[0]) else wrap


_EMPTY = np.empty(0, dtype=np.int64)


# ---------------------------------------------------------------------------
# pair emission for the line-graph transforms
# ---------------------------------------------------------------------------


@njit(cache=True)
def _pairs_within_groups_nb(members, offsets, total):
    left = np.empty(total, np.int64)
    right = np.empty(total, np.int64)
    p = 0
    for g in range(offsets.shape[0] - 1):
        s = offsets[g]
        e = offsets[g + 1]
        for q in range(s + 1, e):
            for i in range(s, q):
                left[p] = members[i]
                right[p] = members[q]
                p += 1
    return left, right


def _pairs_within_groups_np(members, offsets, total):
    if total == 0:
        return _EMPTY.copy(), _EMPTY.copy()
    sizes = np.diff(offsets)
    starts = np.repeat(offsets[:-1], sizes)
    local = np.arange(members.shape[0], dtype=np.int64) - starts
    right_pos = np.repeat(np.arange(members.shape[0], dtype=np.int64), local)
    block = np.concatenate((np.zeros(1, np.int64), np.cumsum(local)))[:-1]
    left_pos = (
        np.arange(total, dtype=np.int64)
        - np.repeat(block, local)
        + np.repeat(starts, local)
    )
    return members[left_pos], members[right_pos]


def pairs_within_groups(members: np.ndarray, offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All unordered pairs of members inside each group.

    ``members`` holds edge ids grouped contiguously; ``offsets`` are the
    group boundaries (len = n_groups + 1). Emits sum-of-C(k,2) pairs, ordered
    by group, then by the second member's position.
    """
    sizes = np.diff(offsets)
    total = int((sizes * (sizes - 1) // 2).sum())
    if accel.use_numba():
        return _pairs_within_groups_nb(members, offsets, total)
    return _pairs_within_groups_np(members, offsets, total)


@njit(cache=True)
def _cross_pairs_nb(in_members, in_offsets, out_members, out_offsets, total):
    left = np.empty(total, np.int64)
    right = np.empty(total, np.int64)
    p = 0
    for v in range(in_offsets.shape[0] - 1):
        for i in range(in_offsets[v], in_offsets[v + 1]):
            a = in_members[i]
            for j in range(out_offsets[v], out_offsets[v + 1]):
                left[p] = a
                right[p] = out_members[j]
                p += 1
    return left, right


def _cross_pairs_np(in_members, in_offsets, out_members, out_offsets, total):
    if total == 0:
        return _EMPTY.copy(), _EMPTY.copy()
    ins = np.diff(in_offsets)
    outs = np.diff(out_offsets)
    per_item_outs = np.repeat(outs, ins)  # out count of each in-member's node
    per_item_ostart = np.repeat(out_offsets[:-1], ins)
    left = np.repeat(in_members, per_item_outs)
    block = np.concatenate((np.zeros(1, np.int64), np.cumsum(per_item_outs)))[:-1]
    right_pos = (
        np.arange(total, dtype=np.int64)
        - np.repeat(block, per_item_outs)
        + np.repeat(per_item_ostart, per_item_outs)
    )
    return left, out_members[right_pos]


def cross_pairs(
    in_members: np.ndarray,
    in_offsets: np.ndarray,
    out_members: np.ndarray,
    out_offsets: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """All (in-member, out-member) pairs per group; sum-of(in*out) pairs."""
    total = int((np.diff(in_offsets) * np.diff(out_offsets)).sum())
    if accel.use_numba():
        return _cross_pairs_nb(in_members, in_offsets, out_members, out_offsets, total)
    return _cross_pairs_np(in_members, in_offsets, out_members, out_offsets, total)


# ---------------------------------------------------------------------------
# BFS-based centralities on undirected CSR adjacency
# ---------------------------------------------------------------------------


@njit(cache=True)
def _bfs_counts_nb(indptr, indices, n):
    comp = np.zeros(n, np.int64)
    dsum = np.zeros(n, np.int64)
    dist = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    for s in range(n):
        dist[:] = -1
        dist[s] = 0
        queue[0] = s
        head, tail = 0, 1
        total = 0
        while head < tail:
            v = queue[head]
            head += 1
            total += dist[v]
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue[tail] = w
                    tail += 1
        comp[s] = tail
        dsum[s] = total
    return comp, dsum


def _csr_to_dense(indptr, indices, n):
    a = np.zeros((n, n), dtype=np.float64)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    a[rows, indices] = 1.0
    return a

def _bfs_counts_np(indptr, indices, n):
    a = _csr_to_dense(indptr, indices, n)
    dist = np.full((n, n), -1, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    frontier = np.eye(n, dtype=bool)
    visited = frontier.copy()
    level = 0
    while frontier.any():
        level += 1
        nxt = ((frontier.astype(np.float64) @ a) > 0) & ~visited
        dist[nxt] = level
        visited |= nxt
        frontier = nxt
    comp = (dist >= 0).sum(axis=1).astype(np.int64)
    dsum = np.where(dist > 0, dist, 0).sum(axis=1).astype(np.int64)
    return comp, dsum


def bfs_counts(indptr: np.ndarray, indices: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per node: size of its connected component and sum of BFS distances."""
    if accel.use_numba():
        return _bfs_counts_nb(indptr, indices, n)
    return _bfs_counts_np(indptr, indices, n)


@njit(cache=True)
def _betweenness_nb(indptr, indices, n):
    bc = np.zeros(n, np.float64)
    dist = np.empty(n, np.int64)
    sigma = np.empty(n, np.float64)
    delta = np.empty(n, np.float64)
    queue = np.empty(n, np.int64)
    for s in range(n):
        dist[:] = -1
        sigma[:] = 0.0
        delta[:] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            v = queue[head]
            head += 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue[tail] = w
                    tail += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        for qi in range(tail - 1, -1, -1):
            w = queue[qi]
            coef = (1.0 + delta[w]) / sigma[w]
            for k in range(indptr[w], indptr[w + 1]):
                v = indices[k]
                if dist[v] == dist[w] - 1:
                    delta[v] += sigma[v] * coef
            if w != s:
                bc[w] += delta[w]
    return bc


def _betweenness_np(indptr, indices, n):
    a = _csr_to_dense(indptr, indices, n)
    sigma = np.eye(n, dtype=np.float64)
    dist = np.full((n, n), -1, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    frontier = np.eye(n, dtype=bool)
    level = 0
    while frontier.any():
        level += 1
        counts = (sigma * frontier) @ a
        nxt = ((frontier.astype(np.float64) @ a) > 0) & (dist < 0)
        sigma = np.where(nxt, counts, sigma)
        dist[nxt] = level
        frontier = nxt
    delta = np.zeros((n, n), dtype=np.float64)
    safe = np.where(sigma > 0.0, sigma, 1.0)
    for lev in range(int(dist.max(initial=0)), 0, -1):
        coef = np.where(dist == lev, (1.0 + delta) / safe, 0.0)
        back = coef @ a.T
        delta = delta + np.where(dist == lev - 1, back * sigma, 0.0)
    np.fill_diagonal(delta, 0.0)
    return delta.sum(axis=0)


def betweenness_sums(indptr: np.ndarray, indices: np.ndarray, n: int) -> np.ndarray:
    """Brandes pair-dependency sums per node, ordered-pair convention.

    Callers halve the result for the unordered-pair convention on
    undirected graphs.
    """
    if accel.use_numba():
        return _betweenness_nb(indptr, indices, n)
    return _betweenness_np(indptr, indices, n)


@njit(cache=True)
def _adjacent_neighbor_pairs_nb(indptr, indices, n):
    tri = np.zeros(n, np.int64)
    for v in range(n):
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            i, j = indptr[v], indptr[u]
            while i < indptr[v + 1] and j < indptr[u + 1]:
                if indices[i] == indices[j]:
                    tri[v] += 1
                    i += 1
                    j += 1
                elif indices[i] < indices[j]:
                    i += 1
                else:
                    j += 1
    return tri


def _adjacent_neighbor_pairs_np(indptr, indices, n):
    a = _csr_to_dense(indptr, indices, n)
    return np.rint((a @ a) * a).sum(axis=1).astype(np.int64)


def adjacent_neighbor_pairs(indptr: np.ndarray, indices: np.ndarray, n: int) -> np.ndarray:
    """Per node: ordered pairs of its neighbors that are themselves adjacent.

    Equals twice the link count among the node's neighbors, i.e. the
    numerator of the local clustering coefficient.
    """
    if accel.use_numba():
        return _adjacent_neighbor_pairs_nb(indptr, indices, n)
    return _adjacent_neighbor_pairs_np(indptr, indices, n)


# ---------------------------------------------------------------------------
# dominant adjacency eigenvalue by shifted power iteration
# ---------------------------------------------------------------------------


@njit(cache=True)
def _power_iteration_nb(indptr, indices, x0, tol, max_iter):
    n = x0.shape[0]
    x = x0.copy()
    norm = 0.0
    for v in range(n):
        norm += x[v] * x[v]
    norm = np.sqrt(norm)
    for v in range(n):
        x[v] /= norm
    y = np.empty(n, np.float64)
    r_prev = np.inf
    r = 0.0
    for it in range(max_iter):
        for v in range(n):
            acc = x[v]  # +I shift keeps the dominant eigenvalue unique
            for k in range(indptr[v], indptr[v + 1]):
                acc += x[indices[k]]
            y[v] = acc
        r = 0.0
        for v in range(n):
            r += x[v] * y[v]
        if abs(r - r_prev) < tol:
            return r - 1.0, it + 1, True
        r_prev = r
        norm = 0.0
        for v in range(n):
            norm += y[v] * y[v]
        norm = np.sqrt(norm)
        for v in range(n):
            x[v] = y[v] / norm
    return r - 1.0, max_iter, False


def _power_iteration_np(indptr, indices, x0, tol, max_iter):
    n = x0.shape[0]
    a = _csr_to_dense(indptr, indices, n)
    x = x0 / np.sqrt((x0 * x0).sum())
    r_prev = np.inf
    r = 0.0
    for it in range(max_iter):
        y = a @ x + x
        r = float(x @ y)
        if abs(r - r_prev) < tol:
            return r - 1.0, it + 1, True
        r_prev = r
        x = y / np.sqrt((y * y).sum())
    return r - 1.0, max_iter, False


def power_iteration(
    indptr: np.ndarray,
    indices: np.ndarray,
    x0: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[float, int, bool]:
    """Largest adjacency eigenvalue via power iteration on A + I.

    The +I shift makes the dominant eigenvalue of the iterated matrix unique
    even for bipartite graphs (where A itself has a -lambda_max twin), so the
    Rayleigh quotient converges to lambda_max + 1. Returns (estimate,
    iterations, converged); the estimate has the shift removed.
    """
    if accel.use_numba():
        return _power_iteration_nb(indptr, indices, x0, tol, max_iter)
    return _power_iteration_np(indptr, indices, x0, tol, max_iter)


# ---------------------------------------------------------------------------
# CART split search
# ---------------------------------------------------------------------------


@njit(cache=True)
def _split_scan_nb(values, labels, n_classes):
    n = values.shape[0]
    left = np.zeros(n_classes, np.int64)
    right = np.zeros(n_classes, np.int64)
    for i in range(n):
        right[labels[i]] += 1
    ssr = 0.0
    for c in range(n_classes):
        ssr += right[c] * right[c]
    ssl = 0.0
    best_cost = np.inf
    best_thr = 0.0
    found = False
    for i in range(n - 1):
        c = labels[i]
        ssl += 2.0 * left[c] + 1.0
        ssr -= 2.0 * right[c] - 1.0
        left[c] += 1
        right[c] -= 1
        if values[i] == values[i + 1]:
            continue
        nl = i + 1.0
        nr = n - nl
        cost = (nl - ssl / nl + nr - ssr / nr) / n
        if cost < best_cost:
            best_cost = cost
            best_thr = 0.5 * (values[i] + values[i + 1])
            found = True
    return best_cost, best_thr, found


def _split_scan_np(values, labels, n_classes):
    n = values.shape[0]
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), labels] = 1
    cum = np.cumsum(onehot, axis=0)
    left = cum[:-1]
    right = cum[-1] - left
    ssl = (left * left).sum(axis=1).astype(np.float64)
    ssr = (right * right).sum(axis=1).astype(np.float64)
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    cost = (nl - ssl / nl + nr - ssr / nr) / n
    valid = values[:-1] != values[1:]
    if not valid.any():
        return np.inf, 0.0, False
    cost = np.where(valid, cost, np.inf)
    i = int(np.argmin(cost))
    return float(cost[i]), 0.5 * (values[i] + values[i + 1]), True


def split_scan(values: np.ndarray, labels: np.ndarray, n_classes: int) -> tuple[float, float, bool]:
    """Best Gini split of one pre-sorted feature column.

    ``values`` ascending, ``labels`` aligned class indices. Returns
    (weighted Gini cost, midpoint threshold, found). Both backends compute
    the cost from exact integer counts with the same expression, so they
    select identical splits.
    """
    if accel.use_numba():
        return _split_scan_nb(values, labels, n_classes)
    return _split_scan_np(values, labels, n_classes)


# ---------------------------------------------------------------------------
# skipgram with negative sampling (document -> token objective)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _skipgram_epoch_nb(pair_doc, pair_tok, negs, gvecs, tvecs, lr):
    n_pairs = pair_doc.shape[0]
    k = negs.shape[1]
    d = gvecs.shape[1]
    loss = 0.0
    e = np.empty(d, np.float64)
    for p in range(n_pairs):
        di = pair_doc[p]
        ti = pair_tok[p]
        for j in range(d):
            e[j] = 0.0
        f = 0.0
        for j in range(d):
            f += gvecs[di, j] * tvecs[ti, j]
        if f > 60.0:
            f = 60.0
        elif f < -60.0:
            f = -60.0
        pr = 1.0 / (1.0 + np.exp(-f))
        loss -= np.log(pr + 1e-10)
        co = lr * (1.0 - pr)
        for j in range(d):
            e[j] += co * tvecs[ti, j]
            tvecs[ti, j] += co * gvecs[di, j]
        for q in range(k):
            ni = negs[p, q]
            if ni == ti:
                continue
            f = 0.0
            for j in range(d):
                f += gvecs[di, j] * tvecs[ni, j]
            if f > 60.0:
                f = 60.0
            elif f < -60.0:
                f = -60.0
            pr = 1.0 / (1.0 + np.exp(-f))
            loss -= np.log(1.0 - pr + 1e-10)
            co = -lr * pr
            for j in range(d):
                e[j] += co * tvecs[ni, j]
                tvecs[ni, j] += co * gvecs[di, j]
        for j in range(d):
            gvecs[di, j] += e[j]
    return loss / n_pairs


def _skipgram_epoch_np(pair_doc, pair_tok, negs, gvecs, tvecs, lr):
    n_pairs = pair_doc.shape[0]
    k = negs.shape[1]
    loss = 0.0
    for p in range(n_pairs):
        di = pair_doc[p]
        ti = pair_tok[p]
        g = gvecs[di]
        e = np.zeros_like(g)
        f = min(60.0, max(-60.0, float(g @ tvecs[ti])))
        pr = 1.0 / (1.0 + np.exp(-f))
        loss -= np.log(pr + 1e-10)
        co = lr * (1.0 - pr)
        e += co * tvecs[ti]
        tvecs[ti] += co * g
        for q in range(k):
            ni = negs[p, q]
            if ni == ti:
                continue
            f = min(60.0, max(-60.0, float(g @ tvecs[ni])))
            pr = 1.0 / (1.0 + np.exp(-f))
            loss -= np.log(1.0 - pr + 1e-10)
            co = -lr * pr
            e += co * tvecs[ni]
            tvecs[ni] += co * g
        gvecs[di] += e
    return loss / n_pairs


def skipgram_epoch(
    pair_doc: np.ndarray,
    pair_tok: np.ndarray,
    negs: np.ndarray,
    gvecs: np.ndarray,
    tvecs: np.ndarray,
    lr: float,
) -> float:
    """One SGD pass over (document, token) pairs; updates vectors in place.

    ``negs`` holds pre-sampled negative token indices per pair so both
    backends consume an identical random stream. Returns the mean negative
    log-likelihood over pairs.
    """
    if accel.use_numba():
        return _skipgram_epoch_nb(pair_doc, pair_tok, negs, gvecs, tvecs, lr)
    return _skipgram_epoch_np(pair_doc, pair_tok, negs, gvecs, tvecs, lr)
