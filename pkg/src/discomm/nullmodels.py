"""Maximum-entropy null models for bipartite graphs.

The bipartite configuration model fixes both degree sequences on average.
Link probabilities are ``p = x y / (1 + x y)`` with ``x = exp(-theta)`` and
``y = exp(-eta)``.  Nodes with the same degree share a multiplier, so the
solver works on the reduced system of distinct degrees.

Nodes whose degree is zero or saturated sit on the boundary of the ensemble:
their probabilities are exactly 0 or 1 and their multipliers are infinite.
They are peeled off before solving.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .graphs import BipartiteGraph, DirectedBipartiteGraph

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residuals: list[float]):
        super().__init__(message)
        self.residuals = residuals


def _peel(k: np.ndarray, h: np.ndarray):
    """Remove zero-degree and saturated nodes until none are left.

    Returns per-node removal step (``-1`` if still active), the frozen link
    value of each removed node, and the residual degrees of the active ones.
    """
    n_top, n_bot = len(k), len(h)
    kr, hr = k.astype(np.int64).copy(), h.astype(np.int64).copy()
    t_step = np.full(n_top, -1, dtype=np.int64)
    b_step = np.full(n_bot, -1, dtype=np.int64)
    t_val = np.zeros(n_top, dtype=np.int8)
    b_val = np.zeros(n_bot, dtype=np.int8)
    t_act = np.ones(n_top, dtype=bool)
    b_act = np.ones(n_bot, dtype=bool)
    step = 0
    changed = True
    while changed:
        changed = False
        nb = int(b_act.sum())
        for i in np.flatnonzero(t_act):
            if kr[i] == 0 or kr[i] == nb:
                full = kr[i] == nb and nb > 0
                t_act[i] = False
                t_step[i] = step
                t_val[i] = 1 if full else 0
                step += 1
                if full:
                    hr[b_act] -= 1
                changed = True
        nt = int(t_act.sum())
        for a in np.flatnonzero(b_act):
            if hr[a] == 0 or hr[a] == nt:
                full = hr[a] == nt and nt > 0
                b_act[a] = False
                b_step[a] = step
                b_val[a] = 1 if full else 0
                step += 1
                if full:
                    kr[t_act] -= 1
                changed = True
    return t_step, t_val, b_step, b_val, kr, hr


@dataclass
class BicmSolution:
    """Fitted bipartite configuration model.

    ``theta``/``eta`` are the per-node multipliers (``+inf`` for nodes frozen
    at probability 0, ``-inf`` for nodes frozen at 1).  ``residual`` is the
    max absolute degree error of the expected degrees.
    """

    theta: np.ndarray
    eta: np.ndarray
    k: np.ndarray
    h: np.ndarray
    residual: float
    iterations: int
    method: str
    _t_step: np.ndarray = field(repr=False)
    _t_val: np.ndarray = field(repr=False)
    _b_step: np.ndarray = field(repr=False)
    _b_val: np.ndarray = field(repr=False)

    @property
    def n_top(self) -> int:
        return len(self.theta)

    @property
    def n_bot(self) -> int:
        return len(self.eta)

    def _block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        x = np.exp(-self.theta[rows])[:, None]
        y = np.exp(-self.eta[cols])[None, :]
        with np.errstate(over="ignore", invalid="ignore"):
            xy = x * y
            p = xy / (1.0 + xy)
        ts, bs = self._t_step[rows][:, None], self._b_step[cols][None, :]
        t_frozen = (ts >= 0) & ((bs < 0) | (ts < bs))
        b_frozen = (bs >= 0) & ~t_frozen
        p = np.where(t_frozen, self._t_val[rows][:, None], p)
        p = np.where(b_frozen, self._b_val[cols][None, :], p)
        return p.astype(float)

    def link_prob(self, i: int, a: int) -> float:
        return float(self._block(np.array([i]), np.array([a]))[0, 0])

    def prob_matrix(self) -> np.ndarray:
        return self._block(np.arange(self.n_top), np.arange(self.n_bot))

    def bottom_groups(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Group bottom nodes with identical probability columns.

        Returns a representative node per group, the group sizes, and the group
        index of every bottom node.  Nodes sharing a multiplier and freeze state
        have identical columns, so sums over the bottom layer can run over groups.
        """
        eta = np.where(self._b_step >= 0, 0.0, self.eta)
        step = np.where(self._b_step >= 0, self._b_step, -1).astype(float)
        key = np.stack([eta, step, self._b_val.astype(float)], axis=1)
        _, first, inverse, counts = np.unique(key, axis=0, return_index=True,
                                              return_inverse=True, return_counts=True)
        return first, counts, inverse.ravel()

    def grouped_probs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        reps, counts, inverse = self.bottom_groups()
        return self._block(np.arange(self.n_top), reps), counts, inverse

    def expected_degrees(self) -> tuple[np.ndarray, np.ndarray]:
        pr, counts, inverse = self.grouped_probs()
        return pr @ counts, pr.sum(axis=0)[inverse]

    def to_dict(self) -> dict:
        return {
            "theta": [float(t) for t in self.theta],
            "eta": [float(e) for e in self.eta],
            "convergence": {"residual": self.residual, "iterations": self.iterations, "method": self.method},
        }


def _reduced_residual(xc, yd, kc, hd, mc, nd):
    xy = np.outer(xc, yd)
    p = xy / (1.0 + xy)
    rk = p @ nd - kc
    rh = mc @ p - hd
    return p, rk, rh


def _solve_reduced(kc, hd, mc, nd, tol, max_iter, n_edges):
    """Solve for class multipliers.  Returns (x, y, iterations, method, trace)."""
    scale = np.sqrt(2.0 * n_edges)
    x = kc / scale
    y = hd / scale
    trace: list[float] = []
    it = 0
    p, rk, rh = _reduced_residual(x, y, kc, hd, mc, nd)
    res = max(np.abs(rk).max(initial=0.0), np.abs(rh).max(initial=0.0))
    trace.append(float(res))
    damp = 1.0
    # fixed-point phase
    stall_window = 25
    while res > tol and it < max_iter:
        it += 1
        denom_x = (nd[None, :] * y[None, :] / (1.0 + np.outer(x, y))).sum(axis=1)
        x_new = kc / denom_x
        denom_y = (mc[:, None] * x_new[:, None] / (1.0 + np.outer(x_new, y))).sum(axis=0)
        y_new = hd / denom_y
        x_try = x ** (1 - damp) * x_new ** damp
        y_try = y ** (1 - damp) * y_new ** damp
        p, rk, rh = _reduced_residual(x_try, y_try, kc, hd, mc, nd)
        new_res = max(np.abs(rk).max(), np.abs(rh).max())
        if not np.isfinite(new_res) or new_res > res:
            damp *= 0.5
            if damp < 1e-3:
                break
            continue
        x, y, res = x_try, y_try, new_res
        trace.append(float(res))
        if len(trace) > stall_window and res > 0.5 * trace[-stall_window]:
            break
    if res <= tol:
        return x, y, it, "fixed-point", trace
    return _newton(np.log(x), np.log(y), kc, hd, mc, nd, tol, max_iter, it, trace)


def _newton(u, v, kc, hd, mc, nd, tol, max_iter, it, trace):
    nc, ndd = len(u), len(v)

    def loglik(u, v):
        s = u[:, None] + v[None, :]
        return (mc * kc) @ u + (nd * hd) @ v - mc @ np.logaddexp(0.0, s) @ nd

    ll = loglik(u, v)
    res = trace[-1]
    while res > tol and it < max_iter:
        it += 1
        s = u[:, None] + v[None, :]
        p = 1.0 / (1.0 + np.exp(-s))
        w = p * (1.0 - p)
        g = np.concatenate([mc * (kc - p @ nd), nd * (hd - mc @ p)])
        hess = np.zeros((nc + ndd, nc + ndd))
        hess[:nc, :nc] = np.diag(mc * (w @ nd))
        hess[nc:, nc:] = np.diag(nd * (mc @ w))
        cross = (mc[:, None] * w) * nd[None, :]
        hess[:nc, nc:] = cross
        hess[nc:, :nc] = cross.T
        # the shift u+c, v-c leaves p unchanged; lstsq picks the minimum-norm step
        step = np.linalg.lstsq(hess, g, rcond=None)[0]
        t = 1.0
        while True:
            u2, v2 = u + t * step[:nc], v + t * step[nc:]
            ll2 = loglik(u2, v2)
            if ll2 >= ll - 1e-12 * abs(ll) or t < 1e-10:
                break
            t *= 0.5
        u, v, ll = u2, v2, ll2
        _, rk, rh = _reduced_residual(np.exp(u), np.exp(v), kc, hd, mc, nd)
        res = float(max(np.abs(rk).max(), np.abs(rh).max()))
        trace.append(res)
        if len(trace) > 60 and res >= trace[-50]:
            break
    if res > tol:
        raise ConvergenceError(f"BiCM did not converge: residual {res:.3e} after {it} iterations", trace)
    return np.exp(u), np.exp(v), it, "newton", trace


def fit_bicm(g: BipartiteGraph | np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> BicmSolution:
    """Fit the bipartite configuration model to the degree sequences of ``g``.

    ``g`` may also be a dense 0/1 biadjacency array.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(g, BipartiteGraph):
        k, h = g.k, g.h
    else:
        b = np.asarray(g)
        k, h = b.sum(axis=1).astype(np.int64), b.sum(axis=0).astype(np.int64)
    if k.size == 0 or h.size == 0 or k.sum() == 0:
        raise ValueError("cannot fit an empty graph")

    t_step, t_val, b_step, b_val, kr, hr = _peel(k, h)
    t_act, b_act = t_step < 0, b_step < 0
    theta = np.where(t_val == 1, -np.inf, np.inf).astype(float)
    eta = np.where(b_val == 1, -np.inf, np.inf).astype(float)
    it, method = 0, "closed-form"
    if t_act.any():
        kc, t_cls, mc = np.unique(kr[t_act], return_inverse=True, return_counts=True)
        hd, b_cls, ndc = np.unique(hr[b_act], return_inverse=True, return_counts=True)
        x, y, it, method, _ = _solve_reduced(kc.astype(float), hd.astype(float), mc.astype(float),
                                             ndc.astype(float), tol * 0.1, max_iter, float(kr[t_act].sum()))
        theta[t_act] = -np.log(x[t_cls])
        eta[b_act] = -np.log(y[b_cls])

    sol = BicmSolution(theta, eta, np.asarray(k), np.asarray(h), 0.0, it, method,
                       t_step, t_val, b_step, b_val)
    kk, hh = sol.expected_degrees()
    sol.residual = float(max(np.abs(kk - k).max(), np.abs(hh - h).max()))
    if sol.residual > tol:
        raise ConvergenceError(f"BiCM residual {sol.residual:.3e} above tolerance {tol:.1e}", [sol.residual])
    log.debug("BiCM converged: residual %.2e in %d iterations (%s)", sol.residual, it, method)
    return sol


def expected_undirected_vmotifs(s: BicmSolution, i: int, j: int) -> float:
    """Expected number of shared bottom neighbours of top nodes i and j."""
    if i == j:
        raise ValueError("pair must have distinct nodes")
    return float(pair_expectations(s, np.array([i]), np.array([j]))[0])


def pair_expectations(s: BicmSolution, rows: np.ndarray, cols: np.ndarray, chunk: int = 200_000) -> np.ndarray:
    """Vectorised ``sum_a p_ia p_ja`` for many pairs at once."""
    pr, counts, _ = s.grouped_probs()
    out = np.empty(len(rows))
    for st in range(0, len(rows), chunk):
        r, c = rows[st:st + chunk], cols[st:st + chunk]
        out[st:st + chunk] = (pr[r] * pr[c]) @ counts
    return out


@dataclass(frozen=True)
class BidcmSolution:
    """Closed-form authorship side of the directed bipartite model.

    Because each post has exactly one author, the authorship probability of
    user i is ``kappa_out[i] / n_posts`` for every post.
    """

    kappa_out: np.ndarray
    kappa_in: np.ndarray
    n_posts: int

    @classmethod
    def from_graph(cls, d: DirectedBipartiteGraph) -> "BidcmSolution":
        if d.n_posts == 0:
            raise ValueError("no posts")
        return cls(np.asarray(d.kappa_out), np.asarray(d.kappa_in), d.n_posts)

    @property
    def q_out(self) -> np.ndarray:
        return self.kappa_out / self.n_posts

    def expectation(self, i, j):
        return self.kappa_out[i] * self.kappa_in[j] / self.n_posts


def expected_directed_vmotifs(d: DirectedBipartiteGraph | BidcmSolution, i: int, j: int) -> float:
    """Expected count of posts by i reposted by j: ``kappa_out[i] kappa_in[j] / n_posts``."""
    if i == j:
        raise ValueError("pair must have distinct nodes")
    s = d if isinstance(d, BidcmSolution) else BidcmSolution.from_graph(d)
    return float(s.expectation(i, j))


def fit_bidcm_layers(d: DirectedBipartiteGraph, tol: float = DEFAULT_TOL) -> tuple[BicmSolution, BicmSolution]:
    """Fit both layers of the directed model independently.

    Only used to cross-check the closed-form expectation; the pipelines never
    need the engagement-side multipliers.
    """
    return fit_bicm(d.authorship, tol=tol), fit_bicm(d.engagement, tol=tol)
