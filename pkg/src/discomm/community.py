"""Modularity clustering of leader graphs and seeded label propagation.

Directed inputs are symmetrised by summing ``w_ij + w_ji`` before anything
else happens.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from typing import Mapping

import numpy as np

from . import _kernels
from .graphs import Partition, WeightedDigraph, WeightedGraph
from .seeding import seed_stream

DEFAULT_RUNS = 100
DEFAULT_REALIZATIONS = 100
MAX_SWEEPS = 100


def _undirected(g) -> WeightedGraph:
    if isinstance(g, WeightedDigraph):
        return g.symmetrize()
    if isinstance(g, WeightedGraph):
        return g
    raise TypeError(f"expected a weighted graph, got {type(g).__name__}")


def _csr_arrays(g: WeightedGraph):
    a = g.adj.tocsr()
    a.sort_indices()
    return (a.indptr.astype(np.int64), a.indices.astype(np.int64),
            a.data.astype(np.float64), a.shape[0])


def modularity(g, p: Partition | np.ndarray) -> float:
    """Newman modularity at resolution 1 of a full labelling of ``g``."""
    ug = _undirected(g)
    labels = p.labels if isinstance(p, Partition) else np.asarray(p, dtype=np.int64)
    if isinstance(p, Partition) and p.ids != ug.ids:
        labels = p.restrict(ug.ids).labels
        if len(labels) != ug.n:
            raise ValueError("partition does not cover every node")
    if len(labels) != ug.n:
        raise ValueError("partition does not cover every node")
    if np.any(labels < 0):
        raise ValueError("modularity needs every node labeled")
    if ug.n == 0:
        return 0.0
    _, dense = np.unique(labels, return_inverse=True)
    return float(_kernels.modularity_csr(*_csr_arrays(ug), dense.astype(np.int64)))


def louvain_best_of(g, runs: int = DEFAULT_RUNS, seed: int = 0) -> Partition:
    """Highest-modularity Louvain partition over ``runs`` shuffled-order runs.

    Ties keep the earliest run.  Community ids are compacted in node order.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    ug = _undirected(g)
    if ug.n == 0:
        raise ValueError("empty graph")
    ip, ix, w, n = _csr_arrays(ug)
    if w.sum() == 0:
        return Partition(ug.ids, np.arange(n, dtype=np.int64))
    best_q, best = -np.inf, None
    for s in seed_stream(seed, runs):
        lab = _kernels.louvain_once(ip, ix, w, n, s)
        q = _kernels.modularity_csr(ip, ix, w, n, lab)
        if q > best_q:
            best_q, best = q, lab
    return Partition(ug.ids, best).compact()


def louvain_runs(g, runs: int = DEFAULT_RUNS, seed: int = 0) -> list[tuple[float, Partition]]:
    """Every individual run's modularity and partition, in run order."""
    ug = _undirected(g)
    ip, ix, w, n = _csr_arrays(ug)
    out = []
    for s in seed_stream(seed, runs):
        lab = _kernels.louvain_once(ip, ix, w, n, s)
        out.append((float(_kernels.modularity_csr(ip, ix, w, n, lab)), Partition(ug.ids, lab).compact()))
    return out


def _tie_break(counts: np.ndarray, seed: int) -> np.ndarray:
    """Row-wise argmax; ties drawn uniformly with a stream keyed by node index."""
    out = np.full(counts.shape[0], -1, dtype=np.int64)
    if counts.shape[1] == 0:
        return out
    mx = counts.max(axis=1)
    labeled = mx > 0
    out[labeled] = counts[labeled].argmax(axis=1)
    n_max = (counts == mx[:, None]).sum(axis=1)
    for i in np.flatnonzero(labeled & (n_max > 1)):
        cand = np.flatnonzero(counts[i] == mx[i])
        out[i] = cand[np.random.default_rng([seed, int(i)]).integers(len(cand))]
    return out


def _seed_vector(ids, seeds: Mapping[str, int]) -> tuple[np.ndarray, list[int]]:
    """Seed labels mapped to dense 0..L-1, plus the original label of each dense id."""
    originals = sorted({int(c) for c in seeds.values()})
    dense = {c: i for i, c in enumerate(originals)}
    vec = np.full(len(ids), -1, dtype=np.int64)
    pos = {u: i for i, u in enumerate(ids)}
    for u, c in seeds.items():
        if u in pos:
            vec[pos[u]] = dense[int(c)]
    return vec, originals


def seeded_label_propagation(g, seeds: Mapping[str, int], realizations: int = DEFAULT_REALIZATIONS,
                             seed: int = 0, jobs: int = 1, max_sweeps: int = MAX_SWEEPS) -> Partition:
    """Propagate fixed seed labels to the rest of ``g``.

    Each realization visits the free nodes in a fresh random order and moves
    each one to the label with the largest incident weight (random among
    ties, keeping the current label when it is among them).  A node that is
    unlabeled at the start of a sweep decides from the labels as they were at
    the start of that sweep, so labels spread one hop per sweep.  The final
    label is the most frequent one across realizations.  Nodes no seed can
    reach stay unlabeled.
    """
    if not seeds:
        raise ValueError("no seeds")
    ug = _undirected(g)
    vec, originals = _seed_vector(ug.ids, seeds)
    if not np.any(vec >= 0):
        raise ValueError("none of the seeds is in the graph")
    ip, ix, w, n = _csr_arrays(ug)
    rseeds = np.array(list(seed_stream(seed, realizations)), dtype=np.int64)
    n_lab = len(originals)
    jobs = max(1, min(jobs, realizations))
    if jobs == 1:
        counts = _kernels.lpa_batch(ip, ix, w, n, vec, n_lab, rseeds, max_sweeps)
    else:
        chunks = np.array_split(rseeds, jobs)
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(lambda rs: _kernels.lpa_batch(ip, ix, w, n, vec, n_lab, rs, max_sweeps), chunks))
        counts = np.sum(parts, axis=0)
    dense = _tie_break(counts, seed)
    lab = np.where(dense >= 0, np.asarray(originals, dtype=np.int64)[np.maximum(dense, 0)], -1)
    lab[vec >= 0] = np.asarray(originals)[vec[vec >= 0]]
    return Partition(ug.ids, lab)


def plurality_assignment(g, seeds: Mapping[str, int], seed: int = 0) -> Partition:
    """Label each free node by the seed community it is most strongly tied to.

    Only direct ties to seeds count; nodes with none stay unlabeled.
    """
    ug = _undirected(g)
    vec, originals = _seed_vector(ug.ids, seeds)
    a = ug.adj.tocsr()
    onehot = np.zeros((ug.n, len(originals)))
    onehot[np.flatnonzero(vec >= 0), vec[vec >= 0]] = 1.0
    weight = np.asarray(a @ onehot)
    dense = _tie_break(weight, seed)
    lab = np.where(dense >= 0, np.asarray(originals, dtype=np.int64)[np.maximum(dense, 0)], -1)
    lab[vec >= 0] = np.asarray(originals)[vec[vec >= 0]]
    return Partition(ug.ids, lab)


def write_partition(p: Partition, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "community"])
        for u, c in zip(p.ids, p.labels):
            w.writerow([u, "" if c < 0 else int(c)])


def read_partition(path) -> Partition:
    ids, labels = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            ids.append(row["user_id"])
            c = row["community"].strip()
            labels.append(-1 if c == "" else int(c))
    return Partition(tuple(ids), np.asarray(labels, dtype=np.int64))
