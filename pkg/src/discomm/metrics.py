"""Information-theoretic comparison of partitions.

Entropies use natural logarithms.  ``P`` plays the role of the reference
classes and ``Q`` of the clusters: homogeneity is 1 when every Q-cluster sits
inside one P-class, completeness is 1 when every P-class sits inside one
Q-cluster.

Partition arguments are either :class:`~discomm.graphs.Partition` objects,
aligned by id, or equal-length label arrays where negative entries mean
unlabeled.  Only nodes labeled in both are compared.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Partition, co_labeled


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # rows: P communities, cols: Q communities
    n: int

    @property
    def p_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def q_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def _aligned(p, q) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, Partition) and isinstance(q, Partition):
        _, a, b = co_labeled(p, q)
        return a, b
    a = np.asarray(p.labels if isinstance(p, Partition) else p)
    b = np.asarray(q.labels if isinstance(q, Partition) else q)
    if a.shape != b.shape:
        raise ValueError("label arrays differ in length")
    both = (a >= 0) & (b >= 0) if a.dtype.kind in "iu" and b.dtype.kind in "iu" else np.ones(len(a), bool)
    return a[both], b[both]


def contingency(p, q) -> ContingencyTable:
    a, b = _aligned(p, q)
    if len(a) == 0:
        raise ValueError("no co-labeled nodes")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    counts = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(counts, (ai, bi), 1)
    return ContingencyTable(counts, len(a))


def _h(counts: np.ndarray, n: int) -> float:
    c = counts[counts > 0].astype(float)
    return float(-(c / n * np.log(c / n)).sum())


def entropies(t: ContingencyTable) -> tuple[float, float, float]:
    """``S(P)``, ``S(Q)`` and the joint entropy."""
    return _h(t.p_marginal, t.n), _h(t.q_marginal, t.n), _h(t.counts.ravel(), t.n)


def mutual_information(p, q) -> float:
    sp_, sq, sj = entropies(contingency(p, q))
    return max(0.0, sp_ + sq - sj)


def variation_of_information(p, q) -> float:
    sp_, sq, sj = entropies(contingency(p, q))
    return max(0.0, 2 * sj - sp_ - sq)


def _hc(t: ContingencyTable) -> tuple[float, float]:
    sp_, sq, sj = entropies(t)
    mi = max(0.0, sp_ + sq - sj)
    h = 1.0 if sp_ == 0 else mi / sp_
    c = 1.0 if sq == 0 else mi / sq
    return min(h, 1.0), min(c, 1.0)


def homogeneity(p, q) -> float:
    return _hc(contingency(p, q))[0]


def completeness(p, q) -> float:
    return _hc(contingency(p, q))[1]


def _combine(h: float, c: float, beta: float) -> float:
    if math.isinf(beta):
        return c
    if beta == 0:
        return h
    den = beta * h + c
    return 0.0 if den == 0 else (1 + beta) * h * c / den


def vmeasure(p, q, beta: float = 1.0) -> float:
    """Weighted harmonic mean of homogeneity and completeness.

    ``beta = 0`` gives homogeneity, ``beta = inf`` completeness.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    h, c = _hc(contingency(p, q))
    return _combine(h, c, beta)


def score(p, q, beta: float = 1.0) -> dict:
    """VM, h and c together with the number of nodes compared."""
    t = contingency(p, q)
    h, c = _hc(t)
    return {"beta": beta, "vm": _combine(h, c, beta), "h": h, "c": c, "n_colabeled": t.n}


def beta_grid(n: int = 21, lo: float = 0.1, hi: float = 10.0) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), n)


def relabel(labels: np.ndarray, fraction: float, rng: np.random.Generator,
            allow_same: bool = False) -> np.ndarray:
    """Move a uniform random ``ceil(fraction * N)`` subset to other communities.

    Each moved node gets a uniformly drawn community among the existing ones,
    excluding its own unless ``allow_same``.
    """
    labels = np.asarray(labels)
    ids = np.unique(labels)
    n = len(labels)
    m = min(n, math.ceil(fraction * n - 1e-9))
    out = labels.copy()
    if m == 0 or len(ids) < 2:
        return out
    idx = rng.choice(n, size=m, replace=False)
    pos = np.searchsorted(ids, labels[idx])
    if allow_same:
        out[idx] = ids[rng.integers(0, len(ids), size=m)]
    else:
        shift = rng.integers(1, len(ids), size=m)
        out[idx] = ids[(pos + shift) % len(ids)]
    return out


def noise_curve(p, fractions, trials: int = 50, seed: int = 0, allow_same: bool = False) -> np.ndarray:
    """Mean VM_1 between ``p`` and randomly reallocated copies of it."""
    labels = np.asarray(p.labels if isinstance(p, Partition) else p)
    labels = labels[labels >= 0]
    out = np.empty(len(fractions))
    for k, f in enumerate(fractions):
        if not 0 <= f <= 1:
            raise ValueError("fractions must lie in [0, 1]")
        rng = np.random.default_rng([seed, k])
        out[k] = np.mean([vmeasure(labels, relabel(labels, f, rng, allow_same)) for _ in range(trials)])
    return out
