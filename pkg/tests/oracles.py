"""Slow, obviously-correct reference implementations used only by the tests.

Nothing here imports the code under test.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np


def forced_entries(b) -> np.ndarray:
    """Entries every graph with the degrees of ``b`` must share: 0, 1, or -1 (free).

    Repeatedly fixes rows and columns whose remaining degree is zero or equal
    to their number of free entries.
    """
    b = np.asarray(b)
    fixed = np.full(b.shape, -1, dtype=np.int64)
    changed = True
    while changed:
        changed = False
        for m, target in ((fixed, b.sum(axis=1)), (fixed.T, b.sum(axis=0))):
            for i, line in enumerate(m):
                free = line == -1
                if not free.any():
                    continue
                left = target[i] - np.sum(line == 1)
                if left == 0 or left == free.sum():
                    line[free] = 0 if left == 0 else 1
                    changed = True
    return fixed


def ensemble_means(theta, eta, b):
    """Exact averages over P(G) proportional to exp(-sum theta k - sum eta h).

    Entries forced by the observed degrees of ``b`` are held fixed (the limit
    of infinite multipliers); every other entry is enumerated.  Returns mean
    k, mean h and the mean co-occurrence matrix of top pairs.
    """
    theta = np.asarray(theta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    fixed = forced_entries(b)
    free = np.argwhere(fixed == -1)
    base = np.where(fixed == 1, 1, 0)
    configs = np.array(list(itertools.product((0, 1), repeat=len(free))), dtype=np.int64).reshape(2 ** len(free), len(free))
    graphs = np.repeat(base[None], len(configs), axis=0)
    if len(free):
        graphs[:, free[:, 0], free[:, 1]] = configs
        field_ = theta[free[:, 0]] + eta[free[:, 1]]
        assert np.isfinite(field_).all(), "free entry with an infinite multiplier"
        energy = configs @ field_
    else:
        energy = np.zeros(1)
    w = np.exp(-(energy - energy.min()))
    w /= w.sum()
    k = graphs.sum(axis=2)
    h = graphs.sum(axis=1)
    co = np.einsum("gia,gja->gij", graphs, graphs)
    return w @ k, w @ h, np.einsum("g,gij->ij", w, co)


def poisson_tail(v: int, lam: float) -> float:
    if v <= 0:
        return 1.0
    return 1.0 - sum(math.exp(-lam) * lam ** x / math.factorial(x) for x in range(v))


def bh_bruteforce(pvalues, alpha: float, m: int) -> set[int]:
    """Benjamini-Hochberg by the textbook step-up rule."""
    order = sorted(range(len(pvalues)), key=lambda i: pvalues[i])
    k_star = 0
    for k in range(len(order), 0, -1):
        if pvalues[order[k - 1]] <= k * alpha / m:
            k_star = k
            break
    if k_star == 0:
        return set()
    cut = pvalues[order[k_star - 1]]
    return {i for i, p in enumerate(pvalues) if p <= cut}


def _entropy(counts) -> float:
    n = sum(counts)
    return -sum(c / n * math.log(c / n) for c in counts if c)


def vm_reference(p, q, beta: float = 1.0) -> tuple[float, float, float]:
    """(VM_beta, h, c) straight from the entropy definitions."""
    n = len(p)
    sp_ = _entropy(Counter(p).values())
    sq = _entropy(Counter(q).values())
    joint = Counter(zip(p, q))
    sj = _entropy(joint.values())
    mi = sp_ + sq - sj
    h = 1.0 if sp_ == 0 else mi / sp_
    c = 1.0 if sq == 0 else mi / sq
    vm = 0.0 if beta * h + c == 0 else (1 + beta) * h * c / (beta * h + c)
    assert n == len(q)
    return vm, h, c


def modularity_reference(edges, labels) -> float:
    """Newman modularity from an undirected weighted edge list ``(u, v, w)``."""
    m = sum(w for _, _, w in edges)
    if m == 0:
        return 0.0
    deg = Counter()
    inside = Counter()
    for u, v, w in edges:
        deg[labels[u]] += w
        deg[labels[v]] += w
        if labels[u] == labels[v]:
            inside[labels[u]] += w
    return sum(inside[c] / m - (deg[c] / (2 * m)) ** 2 for c in deg)


def hindex_reference(counts) -> int:
    return max((h for h in range(len(counts) + 1) if sum(1 for c in counts if c >= h) >= h), default=0)


def poisson_binomial_tail(v: int, probs) -> float:
    """P(X >= v) for a sum of independent Bernoullis, by the textbook recursion."""
    dist = [1.0]
    for p in probs:
        nxt = [0.0] * (len(dist) + 1)
        for k, mass in enumerate(dist):
            nxt[k] += mass * (1 - p)
            nxt[k + 1] += mass * p
        dist = nxt
    return sum(dist[v:]) if v > 0 else 1.0
