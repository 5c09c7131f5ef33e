"""Immutable graph containers shared by the rest of the package.

Node identity is handled by :class:`IdIndex`, which maps opaque string ids to
dense integer indices in first-seen order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class GraphError(ValueError):
    pass


class IdIndex:
    """Bijection between external string ids and contiguous integer indices."""

    def __init__(self, ids: Iterable[str] = ()):
        self._ids: list[str] = []
        self._index: dict[str, int] = {}
        for i in ids:
            self.add(i)

    def add(self, ext: str) -> int:
        idx = self._index.get(ext)
        if idx is None:
            idx = len(self._ids)
            self._index[ext] = idx
            self._ids.append(ext)
        return idx

    def __getitem__(self, ext: str) -> int:
        return self._index[ext]

    def __contains__(self, ext: object) -> bool:
        return ext in self._index

    def __len__(self) -> int:
        return len(self._ids)

    def __iter__(self):
        return iter(self._ids)

    def get(self, ext: str, default=None):
        return self._index.get(ext, default)

    def external(self, idx: int) -> str:
        return self._ids[idx]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self._ids)


@dataclass(frozen=True)
class BipartiteGraph:
    """Unweighted bipartite graph stored as a sparse 0/1 biadjacency matrix.

    Rows are the top layer, columns the bottom layer.  ``csr`` and ``csc``
    hold the same matrix in row- and column-major form.
    """

    top_ids: tuple[str, ...]
    bot_ids: tuple[str, ...]
    csr: sp.csr_matrix
    csc: sp.csc_matrix = field(repr=False)
    k: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, biadjacency, top_ids: Sequence[str] | None = None,
                    bot_ids: Sequence[str] | None = None) -> "BipartiteGraph":
        m = sp.csr_matrix(biadjacency, dtype=np.int64)
        m.sum_duplicates()
        m.eliminate_zeros()
        m.data[:] = 1
        n_top, n_bot = m.shape
        if top_ids is None:
            top_ids = [str(i) for i in range(n_top)]
        if bot_ids is None:
            bot_ids = [str(a) for a in range(n_bot)]
        if len(top_ids) != n_top or len(bot_ids) != n_bot:
            raise GraphError("id lists do not match matrix shape")
        k = np.asarray(m.sum(axis=1)).ravel().astype(np.int64)
        h = np.asarray(m.sum(axis=0)).ravel().astype(np.int64)
        return cls(tuple(top_ids), tuple(bot_ids), m, m.tocsc(), k, h)

    @property
    def n_top(self) -> int:
        return len(self.top_ids)

    @property
    def n_bot(self) -> int:
        return len(self.bot_ids)

    @property
    def n_edges(self) -> int:
        return int(self.csr.nnz)

    def dense(self) -> np.ndarray:
        return self.csr.toarray()

    def edges(self) -> set[tuple[str, str]]:
        coo = self.csr.tocoo()
        return {(self.top_ids[i], self.bot_ids[a]) for i, a in zip(coo.row, coo.col)}


def build_bipartite(edge_list: Iterable[tuple[str, str]]) -> BipartiteGraph:
    """Build a deduplicated bipartite graph from ``(top_id, bot_id)`` pairs."""
    top, bot = IdIndex(), IdIndex()
    rows, cols = [], []
    for t, b in edge_list:
        rows.append(top.add(t))
        cols.append(bot.add(b))
    if not rows:
        raise GraphError("empty graph")
    m = sp.coo_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)),
                      shape=(len(top), len(bot)))
    return BipartiteGraph.from_matrix(m, top.ids, bot.ids)


@dataclass(frozen=True)
class DirectedBipartiteGraph:
    """Users x posts with an authorship layer and an engagement layer.

    ``authorship[i, a] = 1`` if user i wrote post a; ``engagement[i, a] = 1`` if
    user i reposted post a.  Both share the same user and post indexing.
    """

    authorship: BipartiteGraph
    engagement: BipartiteGraph

    def __post_init__(self):
        a, e = self.authorship, self.engagement
        if a.top_ids != e.top_ids or a.bot_ids != e.bot_ids:
            raise GraphError("layers must share user and post indexing")
        if a.n_bot and not np.all(a.h == 1):
            raise GraphError("every post needs exactly one author")
        if a.csr.multiply(e.csr).nnz:
            raise GraphError("a user cannot repost their own post")

    @property
    def user_ids(self) -> tuple[str, ...]:
        return self.authorship.top_ids

    @property
    def post_ids(self) -> tuple[str, ...]:
        return self.authorship.bot_ids

    @property
    def kappa_out(self) -> np.ndarray:
        return self.authorship.k

    @property
    def kappa_in(self) -> np.ndarray:
        return self.engagement.k

    @property
    def n_posts(self) -> int:
        return self.authorship.n_bot

    @property
    def post_reposts(self) -> np.ndarray:
        return self.engagement.h


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph; ``adj`` is symmetric with zero diagonal."""

    ids: tuple[str, ...]
    adj: sp.csr_matrix

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def total_weight(self) -> float:
        return float(self.adj.sum()) / 2.0

    @classmethod
    def from_edges(cls, ids: Sequence[str], edges: Iterable[tuple[int, int, float]]) -> "WeightedGraph":
        n = len(ids)
        rows, cols, w = [], [], []
        for u, v, x in edges:
            if u == v:
                continue
            rows += [u, v]
            cols += [v, u]
            w += [x, x]
        adj = sp.csr_matrix((np.asarray(w, dtype=float), (rows, cols)), shape=(n, n))
        adj.sum_duplicates()
        return cls(tuple(ids), adj)

    def subgraph(self, nodes: Sequence[int]) -> "WeightedGraph":
        nodes = np.asarray(nodes, dtype=np.int64)
        sub = self.adj[nodes][:, nodes].tocsr()
        return WeightedGraph(tuple(self.ids[i] for i in nodes), sub)

    def binary(self) -> "WeightedGraph":
        a = self.adj.copy()
        a.data[:] = 1.0
        return WeightedGraph(self.ids, a)


@dataclass(frozen=True)
class WeightedDigraph:
    """Directed graph with positive integer arc weights and no self-loops.

    ``adj[i, j]`` is the weight of arc i -> j.
    """

    ids: tuple[str, ...]
    adj: sp.csr_matrix

    @classmethod
    def from_arcs(cls, ids: Sequence[str], arcs: Iterable[tuple[int, int, int]]) -> "WeightedDigraph":
        n = len(ids)
        rows, cols, w = [], [], []
        for s, t, x in arcs:
            if s == t:
                continue
            if x < 1:
                raise GraphError("arc weights must be >= 1")
            rows.append(s)
            cols.append(t)
            w.append(int(x))
        adj = sp.csr_matrix((np.asarray(w, dtype=np.int64), (rows, cols)), shape=(n, n))
        adj.sum_duplicates()
        return cls(tuple(ids), adj)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def out_strength(self) -> np.ndarray:
        return np.asarray(self.adj.sum(axis=1)).ravel()

    @property
    def in_strength(self) -> np.ndarray:
        return np.asarray(self.adj.sum(axis=0)).ravel()

    def arcs(self) -> list[tuple[str, str, int]]:
        coo = self.adj.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(self.ids[coo.row[k]], self.ids[coo.col[k]], int(coo.data[k])) for k in order]

    def symmetrize(self) -> WeightedGraph:
        a = (self.adj + self.adj.T).astype(float).tocsr()
        return WeightedGraph(self.ids, a)

    def subgraph(self, nodes: Sequence[int]) -> "WeightedDigraph":
        nodes = np.asarray(nodes, dtype=np.int64)
        return WeightedDigraph(tuple(self.ids[i] for i in nodes), self.adj[nodes][:, nodes].tocsr())


def largest_component(adj: sp.spmatrix) -> np.ndarray:
    """Sorted indices of the largest weakly connected component.

    Ties between equally large components go to the one containing the
    lowest index.
    """
    n = adj.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    _, comp = connected_components(adj, directed=True, connection="weak")
    sizes = np.bincount(comp)
    # component labels follow index order, argmax picks the first
    best = int(np.argmax(sizes))
    return np.flatnonzero(comp == best)


def weakly_connected_component(g, restrict_to: Iterable[str] | None = None):
    """Largest weakly connected component of the subgraph induced on ``restrict_to``.

    Works for :class:`WeightedDigraph` and :class:`WeightedGraph`.  Returns the
    component and a map from external id to its index in the component.
    """
    if restrict_to is None:
        keep = np.arange(g.n)
    else:
        pos = {u: i for i, u in enumerate(g.ids)}
        wanted = set(restrict_to)
        missing = wanted - pos.keys()
        if missing:
            raise GraphError(f"restriction contains unknown nodes: {sorted(missing)[:5]}")
        keep = np.array(sorted(pos[u] for u in wanted), dtype=np.int64)
    if keep.size == 0:
        raise GraphError("empty restriction")
    sub = g.subgraph(keep)
    comp = largest_component(sub.adj)
    out = sub.subgraph(comp)
    return out, {u: i for i, u in enumerate(out.ids)}


@dataclass(frozen=True)
class Partition:
    """Node -> community labelling; ``-1`` marks an unlabeled node."""

    ids: tuple[str, ...]
    labels: np.ndarray

    UNLABELED = -1

    def __post_init__(self):
        if len(self.ids) != len(self.labels):
            raise GraphError("ids and labels differ in length")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, int | None], order: Sequence[str] | None = None) -> "Partition":
        ids = tuple(order) if order is not None else tuple(mapping)
        labels = np.array([(-1 if mapping.get(u) is None else int(mapping[u])) for u in ids], dtype=np.int64)
        return cls(ids, labels)

    def to_mapping(self, include_unlabeled: bool = False) -> dict[str, int]:
        return {u: int(c) for u, c in zip(self.ids, self.labels) if include_unlabeled or c >= 0}

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n_labeled(self) -> int:
        return int(np.sum(self.labels >= 0))

    @property
    def n_communities(self) -> int:
        return len(np.unique(self.labels[self.labels >= 0]))

    def compact(self) -> "Partition":
        """Relabel communities as 0, 1, ... in order of first appearance."""
        out = np.full(len(self.labels), -1, dtype=np.int64)
        seen: dict[int, int] = {}
        for i, c in enumerate(self.labels):
            if c >= 0:
                out[i] = seen.setdefault(int(c), len(seen))
        return Partition(self.ids, out)

    def restrict(self, ids: Iterable[str]) -> "Partition":
        m = self.to_mapping(include_unlabeled=True)
        keep = [u for u in ids if u in m]
        return Partition(tuple(keep), np.array([m[u] for u in keep], dtype=np.int64))


def co_labeled(p: Partition, q: Partition) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Ids labeled in both partitions, in ``p`` order, and their label arrays."""
    qm = q.to_mapping()
    ids, a, b = [], [], []
    for u, c in zip(p.ids, p.labels):
        if c >= 0 and u in qm:
            ids.append(u)
            a.append(int(c))
            b.append(qm[u])
    return ids, np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
