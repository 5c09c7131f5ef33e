"""Compiled inner loops for Louvain and label propagation.

Graphs arrive as CSR arrays of a symmetric weight matrix.  Diagonal entries
hold twice the self-loop weight so that row sums are node strengths.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _strengths(indptr, weights, n):
    k = np.zeros(n)
    for i in range(n):
        for e in range(indptr[i], indptr[i + 1]):
            k[i] += weights[e]
    return k


@njit(cache=True)
def _one_level(indptr, indices, weights, n, order):
    k = _strengths(indptr, weights, n)
    m2 = k.sum()
    comm = np.arange(n)
    tot = k.copy()
    neigh_w = np.zeros(n)
    neigh_c = np.empty(n, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    visit = 0
    moved = False
    improved = True
    while improved:
        improved = False
        for idx in range(n):
            i = order[idx]
            ci = comm[i]
            ki = k[i]
            visit += 1
            neigh_c[0] = ci
            neigh_w[ci] = 0.0
            mark[ci] = visit
            n_touched = 1
            for e in range(indptr[i], indptr[i + 1]):
                j = indices[e]
                if j == i:
                    continue
                cj = comm[j]
                if mark[cj] != visit:
                    mark[cj] = visit
                    neigh_w[cj] = 0.0
                    neigh_c[n_touched] = cj
                    n_touched += 1
                neigh_w[cj] += weights[e]
            tot[ci] -= ki
            best_c = ci
            best_gain = neigh_w[ci] - tot[ci] * ki / m2
            for t in range(1, n_touched):
                c = neigh_c[t]
                gain = neigh_w[c] - tot[c] * ki / m2
                if gain > best_gain + 1e-12:
                    best_gain = gain
                    best_c = c
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                improved = True
                moved = True
    return comm, moved


@njit(cache=True)
def _renumber(comm, n):
    remap = np.full(n, -1, dtype=np.int64)
    out = np.empty(n, dtype=np.int64)
    c = 0
    for i in range(n):
        if remap[comm[i]] < 0:
            remap[comm[i]] = c
            c += 1
        out[i] = remap[comm[i]]
    return out, c


@njit(cache=True)
def _aggregate(indptr, indices, weights, n, comm, n_comm):
    nnz = indptr[n]
    keys = np.empty(nnz, dtype=np.int64)
    for i in range(n):
        for e in range(indptr[i], indptr[i + 1]):
            keys[e] = comm[i] * n_comm + comm[indices[e]]
    order = np.argsort(keys, kind="mergesort")
    new_rows = np.empty(nnz, dtype=np.int64)
    new_cols = np.empty(nnz, dtype=np.int64)
    new_w = np.empty(nnz)
    cnt = -1
    last = -1
    for t in range(nnz):
        e = order[t]
        key = keys[e]
        if key != last:
            cnt += 1
            new_rows[cnt] = key // n_comm
            new_cols[cnt] = key % n_comm
            new_w[cnt] = 0.0
            last = key
        new_w[cnt] += weights[e]
    cnt += 1
    ip = np.zeros(n_comm + 1, dtype=np.int64)
    for t in range(cnt):
        ip[new_rows[t] + 1] += 1
    for c in range(n_comm):
        ip[c + 1] += ip[c]
    return ip, new_cols[:cnt].copy(), new_w[:cnt].copy()


@njit(cache=True)
def louvain_once(indptr, indices, weights, n, seed):
    np.random.seed(seed)
    membership = np.arange(n)
    ip, ix, w = indptr, indices, weights
    cur_n = n
    while True:
        order = np.random.permutation(cur_n)
        comm, moved = _one_level(ip, ix, w, cur_n, order)
        if not moved:
            break
        comm, n_comm = _renumber(comm, cur_n)
        for i in range(n):
            membership[i] = comm[membership[i]]
        if n_comm == cur_n:
            break
        ip, ix, w = _aggregate(ip, ix, w, cur_n, comm, n_comm)
        cur_n = n_comm
    out, _ = _renumber(membership, n)
    return out


@njit(cache=True)
def modularity_csr(indptr, indices, weights, n, labels):
    n_c = labels.max() + 1
    internal = np.zeros(n_c)
    deg = np.zeros(n_c)
    m2 = 0.0
    for i in range(n):
        ci = labels[i]
        for e in range(indptr[i], indptr[i + 1]):
            w = weights[e]
            m2 += w
            deg[ci] += w
            if labels[indices[e]] == ci:
                internal[ci] += w
    if m2 == 0.0:
        return 0.0
    q = 0.0
    for c in range(n_c):
        q += internal[c] / m2 - (deg[c] / m2) ** 2
    return q


@njit(cache=True, nogil=True)
def lpa_realization(indptr, indices, weights, n, seeds, n_labels, rseed, max_sweeps):
    np.random.seed(rseed)
    labels = seeds.copy()
    n_free = 0
    for i in range(n):
        if seeds[i] < 0:
            n_free += 1
    free = np.empty(n_free, dtype=np.int64)
    t = 0
    for i in range(n):
        if seeds[i] < 0:
            free[t] = i
            t += 1
    acc = np.zeros(n_labels)
    ties = np.empty(n_labels, dtype=np.int64)
    snapshot = labels.copy()
    for sweep in range(max_sweeps):
        snapshot[:] = labels
        perm = np.random.permutation(n_free)
        changed = 0
        for idx in range(n_free):
            i = free[perm[idx]]
            src = labels
            if snapshot[i] < 0:
                src = snapshot
            any_lab = False
            for e in range(indptr[i], indptr[i + 1]):
                lj = src[indices[e]]
                if lj >= 0:
                    acc[lj] += weights[e]
                    any_lab = True
            if not any_lab:
                continue
            best = -1.0
            for c in range(n_labels):
                if acc[c] > best:
                    best = acc[c]
            n_ties = 0
            for c in range(n_labels):
                if acc[c] == best:
                    ties[n_ties] = c
                    n_ties += 1
            cur = labels[i]
            keep = cur >= 0 and acc[cur] == best
            for c in range(n_labels):
                acc[c] = 0.0
            if keep:
                continue
            pick = ties[0]
            if n_ties > 1:
                pick = ties[np.random.randint(n_ties)]
            labels[i] = pick
            changed += 1
        if changed == 0:
            break
    return labels


@njit(cache=True, nogil=True)
def lpa_batch(indptr, indices, weights, n, seeds, n_labels, rseeds, max_sweeps):
    counts = np.zeros((n, n_labels), dtype=np.int32)
    for r in range(len(rseeds)):
        lab = lpa_realization(indptr, indices, weights, n, seeds, n_labels, rseeds[r], max_sweeps)
        for i in range(n):
            if lab[i] >= 0:
                counts[i, lab[i]] += 1
    return counts
