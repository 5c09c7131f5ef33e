"""Statistically validated projections of bipartite graphs.

Co-occurrence counts (V-motifs) are compared to their null expectation with a
one-sided Poisson test, and the Benjamini-Hochberg procedure picks which pairs
survive.  Pairs that never co-occur are still hypotheses (p = 1) and count
towards the number of tests.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.special import gammainc

from .graphs import BipartiteGraph, DirectedBipartiteGraph, WeightedDigraph, WeightedGraph
from .nullmodels import BicmSolution, BidcmSolution, pair_expectations

DEFAULT_ALPHA = 0.01
ALPHA_SWEEP = (0.001, 0.01, 0.05)


@dataclass
class VMotifTable:
    """Observed co-occurrences for the pairs with ``v > 0``.

    ``rows``/``cols`` index ``ids``.  For undirected tables ``rows < cols``;
    for directed ones ``(i, j)`` counts posts by i reposted by j.
    ``n_hypotheses`` is the number of candidate pairs, zero-count ones included.
    """

    ids: tuple[str, ...]
    rows: np.ndarray
    cols: np.ndarray
    v: np.ndarray
    directed: bool
    n_hypotheses: int
    lam: np.ndarray | None = None
    pvalue: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.v)

    def as_dict(self) -> dict[tuple[str, str], int]:
        return {(self.ids[i], self.ids[j]): int(x) for i, j, x in zip(self.rows, self.cols, self.v)}


def count_undirected_vmotifs(g: BipartiteGraph) -> VMotifTable:
    """Shared bottom neighbours for every pair of top nodes that share any."""
    co = (g.csr @ g.csr.T).tocoo()
    keep = co.row < co.col
    rows, cols, v = co.row[keep], co.col[keep], co.data[keep].astype(np.int64)
    order = np.lexsort((cols, rows))
    active = int(np.sum(g.k > 0))
    return VMotifTable(g.top_ids, rows[order].astype(np.int64), cols[order].astype(np.int64), v[order],
                       directed=False, n_hypotheses=active * (active - 1) // 2)


def count_directed_vmotifs(d: DirectedBipartiteGraph) -> VMotifTable:
    """Posts authored by i and reposted by j, for all ordered pairs ``i != j``."""
    co = (d.authorship.csr @ d.engagement.csr.T).tocoo()
    keep = (co.row != co.col) & (co.data > 0)
    rows, cols, v = co.row[keep], co.col[keep], co.data[keep].astype(np.int64)
    order = np.lexsort((cols, rows))
    out_active = d.kappa_out > 0
    in_active = d.kappa_in > 0
    m = int(out_active.sum()) * int(in_active.sum()) - int(np.sum(out_active & in_active))
    return VMotifTable(d.user_ids, rows[order].astype(np.int64), cols[order].astype(np.int64), v[order],
                       directed=True, n_hypotheses=m)


def poisson_pvalue(v, lam):
    """Upper tail ``P(X >= v)`` for ``X ~ Poisson(lam)``.

    Vectorised.  Uses the identity ``P(X >= v) = P(v, lam)`` with the
    regularised lower incomplete gamma function, which stays accurate far
    into the tail.
    """
    v_arr = np.asarray(v)
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(v_arr < 0) or np.any(lam_arr < 0):
        raise ValueError("counts and expectations must be nonnegative")
    if not np.all(np.equal(np.mod(v_arr, 1), 0)):
        raise ValueError("counts must be integers")
    v_f = v_arr.astype(float)
    with np.errstate(invalid="ignore"):
        p = np.where(v_f <= 0, 1.0, np.where(lam_arr == 0, 0.0, gammainc(np.maximum(v_f, 1.0), lam_arr)))
    p = np.clip(p, 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


def poisson_binomial_pvalue_oracle(v: int, probs) -> float:
    """Exact ``P(X >= v)`` for a sum of independent Bernoullis, by convolution."""
    probs = np.asarray(probs, dtype=float)
    if np.any((probs < 0) | (probs > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    if v <= 0:
        return 1.0
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    for n, q in enumerate(probs, 1):
        pmf[1:n + 1] = pmf[1:n + 1] * (1 - q) + pmf[:n] * q
        pmf[0] *= 1 - q
    return float(min(1.0, pmf[v:].sum()))


def fdr_select(pvalues, alpha: float, n_tests: int | None = None) -> tuple[float, np.ndarray]:
    """Benjamini-Hochberg selection.

    ``n_tests`` defaults to ``len(pvalues)``; pass the full hypothesis count
    when implicit p = 1 tests are left out.  Returns the threshold ``p*``
    (0 when nothing is selected) and a boolean mask over ``pvalues``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    p = np.asarray(pvalues, dtype=float)
    m = len(p) if n_tests is None else int(n_tests)
    if m < len(p):
        raise ValueError("n_tests smaller than the number of p-values")
    if len(p) == 0 or m == 0:
        return 0.0, np.zeros(len(p), dtype=bool)
    ps = np.sort(p)
    ok = np.flatnonzero(ps <= alpha * np.arange(1, len(ps) + 1) / m)
    if ok.size == 0:
        return 0.0, np.zeros(len(p), dtype=bool)
    thr = float(ps[ok[-1]])
    return thr, p <= thr


def score_undirected(g: BipartiteGraph, sol: BicmSolution) -> VMotifTable:
    t = count_undirected_vmotifs(g)
    t.lam = pair_expectations(sol, t.rows, t.cols)
    t.pvalue = poisson_pvalue(t.v, t.lam)
    return t


def score_directed(d: DirectedBipartiteGraph) -> VMotifTable:
    t = count_directed_vmotifs(d)
    s = BidcmSolution.from_graph(d)
    t.lam = s.expectation(t.rows, t.cols).astype(float)
    t.pvalue = poisson_pvalue(t.v, t.lam)
    return t


@dataclass
class ValidatedProjection:
    ids: tuple[str, ...]
    directed: bool
    alpha: float
    threshold: float
    rows: np.ndarray
    cols: np.ndarray
    v: np.ndarray
    lam: np.ndarray
    pvalue: np.ndarray
    n_candidates: int
    n_hypotheses: int
    meta: dict = field(default_factory=dict)

    @property
    def n_edges(self) -> int:
        return len(self.rows)

    @property
    def retention_ratio(self) -> float:
        """Retained edges over observed (v > 0) pairs."""
        return self.n_edges / self.n_candidates if self.n_candidates else 0.0

    @property
    def empty(self) -> bool:
        return self.n_edges == 0

    def edge_set(self) -> set[tuple[str, str]]:
        return {(self.ids[i], self.ids[j]) for i, j in zip(self.rows, self.cols)}

    def graph(self, weighted: bool = False) -> WeightedGraph:
        """Symmetrised graph of the retained edges (binary unless ``weighted``)."""
        w = self.v.astype(float) if weighted else np.ones(self.n_edges)
        n = len(self.ids)
        a = sp.coo_matrix((w, (self.rows, self.cols)), shape=(n, n)).tocsr()
        a = (a + a.T).tocsr() if weighted else ((a + a.T) > 0).astype(float).tocsr()
        return WeightedGraph(self.ids, a)

    def digraph(self) -> WeightedDigraph:
        return WeightedDigraph.from_arcs(self.ids, zip(self.rows, self.cols, self.v))

    def summary(self) -> dict:
        return {
            "alpha": self.alpha,
            "threshold": self.threshold,
            "directed": self.directed,
            "n_nodes": len(self.ids),
            "n_edges": self.n_edges,
            "n_candidates": self.n_candidates,
            "n_hypotheses": self.n_hypotheses,
            "retention_ratio": self.retention_ratio,
            "empty": self.empty,
        }

    def write(self, csv_path, json_path=None) -> None:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source", "target", "v", "lambda", "pvalue"])
            for i, j, v, lam, p in zip(self.rows, self.cols, self.v, self.lam, self.pvalue):
                w.writerow([self.ids[i], self.ids[j], int(v), repr(float(lam)), repr(float(p))])
        if json_path is not None:
            Path(json_path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")


def validated_projection(table: VMotifTable, alpha: float = DEFAULT_ALPHA) -> ValidatedProjection:
    """Keep the pairs whose co-occurrence survives FDR control at ``alpha``."""
    if table.pvalue is None or table.lam is None:
        raise ValueError("table has no p-values; score it first")
    thr, keep = fdr_select(table.pvalue, alpha, table.n_hypotheses)
    return ValidatedProjection(
        ids=table.ids, directed=table.directed, alpha=alpha, threshold=thr,
        rows=table.rows[keep], cols=table.cols[keep], v=table.v[keep],
        lam=table.lam[keep], pvalue=table.pvalue[keep],
        n_candidates=len(table), n_hypotheses=table.n_hypotheses,
    )
