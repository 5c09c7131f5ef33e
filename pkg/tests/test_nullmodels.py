import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from discomm.graphs import BipartiteGraph
from discomm.ingest import DebateDataset, PostEvent, build_user_post_digraph
from discomm.nullmodels import (BidcmSolution, ConvergenceError, expected_directed_vmotifs,
                                expected_undirected_vmotifs, fit_bicm, fit_bidcm_layers)
from oracles import ensemble_means

B3 = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]])


def test_two_by_two_uniform():
    s = fit_bicm(np.eye(2, dtype=int))
    assert np.allclose(s.prob_matrix(), 0.5, atol=1e-9)


def test_complete_graph_saturates():
    s = fit_bicm(np.ones((2, 3), dtype=int))
    assert (s.prob_matrix() == 1.0).all()
    assert np.isneginf(s.theta).all()


def test_three_by_three_matches_enumeration():
    s = fit_bicm(B3)
    p = s.prob_matrix()
    # the regular 3x3 graph forces p = 2/3 everywhere
    assert np.allclose(p, 2 / 3, atol=1e-9)
    k, h, co = ensemble_means(s.theta, s.eta, B3)
    assert np.allclose(k, 2, atol=1e-8) and np.allclose(h, 2, atol=1e-8)
    assert abs(expected_undirected_vmotifs(s, 0, 1) - co[0, 1]) < 1e-8
    assert abs(co[0, 1] - 4 / 3) < 1e-8  # frozen: 3 * (2/3)^2


def test_uniform_half_over_two_posts():
    s = fit_bicm(np.eye(2, dtype=int))
    assert expected_undirected_vmotifs(s, 0, 1) == pytest.approx(0.5)


def test_zero_degree_node_has_zero_expectation():
    s = fit_bicm(np.array([[1, 1, 0], [0, 0, 0], [0, 1, 1]]))
    assert (s.prob_matrix()[1] == 0).all()
    assert expected_undirected_vmotifs(s, 0, 1) == 0.0
    with pytest.raises(ValueError):
        expected_undirected_vmotifs(s, 2, 2)


def test_empty_graph_rejected():
    with pytest.raises(ValueError):
        fit_bicm(np.zeros((3, 3), dtype=int))


def test_nonconvergence_reports_residual():
    rng = np.random.default_rng(1)
    b = (rng.random((40, 80)) < 0.2).astype(int)
    with pytest.raises(ConvergenceError) as err:
        fit_bicm(b, tol=1e-14, max_iter=2)
    assert err.value.residuals


random_bip = arrays(np.int64, st.tuples(st.integers(2, 12), st.integers(2, 20)), elements=st.integers(0, 1))


@given(random_bip)
def test_degree_constraints_and_mass(b):
    if b.sum() == 0:
        return
    s = fit_bicm(b)
    p = s.prob_matrix()
    assert ((p >= 0) & (p <= 1)).all()
    assert np.abs(p.sum(1) - b.sum(1)).max() <= 1e-8
    assert np.abs(p.sum(0) - b.sum(0)).max() <= 1e-8
    assert abs(p.sum() - b.sum()) <= p.size * 1e-8


@given(random_bip, st.randoms(use_true_random=False))
def test_permutation_equivariance(b, rnd):
    if b.sum() == 0:
        return
    r = list(range(b.shape[0]))
    c = list(range(b.shape[1]))
    rnd.shuffle(r)
    rnd.shuffle(c)
    p = fit_bicm(b).prob_matrix()
    q = fit_bicm(b[np.ix_(r, c)]).prob_matrix()
    assert np.allclose(p[np.ix_(r, c)], q, atol=1e-7)


def test_probability_decreases_in_theta():
    s = fit_bicm(B3)
    eta = s.eta[0]
    thetas = np.linspace(-3, 3, 50)
    p = 1 / (1 + np.exp(thetas + eta))
    assert (np.diff(p) < 0).all()
    assert s.link_prob(0, 0) == pytest.approx(1 / (1 + np.exp(s.theta[0] + eta)))


def test_small_graphs_match_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(20):
        shape = (int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        b = (rng.random(shape) < 0.5).astype(int)
        if b.sum() == 0:
            continue
        s = fit_bicm(b)
        k, h, _ = ensemble_means(s.theta, s.eta, b)
        assert np.abs(k - b.sum(1)).max() < 1e-6
        assert np.abs(h - b.sum(0)).max() < 1e-6


def test_directed_expectation_formula():
    s = BidcmSolution(np.array([3, 0]), np.array([0, 4]), 100)
    assert expected_directed_vmotifs(s, 0, 1) == pytest.approx(0.12)
    assert expected_directed_vmotifs(s, 1, 0) == 0.0
    with pytest.raises(ValueError):
        BidcmSolution.from_graph(type("G", (), {"n_posts": 0})())


def test_directed_expectation_matches_layer_fit():
    rng = np.random.default_rng(11)
    events = [PostEvent(f"p{a}", f"u{rng.integers(5)}") for a in range(12)]
    for a in range(12):
        for u in range(8):
            if rng.random() < 0.3:
                events.append(PostEvent(f"r{a}_{u}", f"u{u}", f"p{a}"))
    g = build_user_post_digraph(DebateDataset.from_events(events))
    out_sol, in_sol = fit_bidcm_layers(g)
    qo, qi = out_sol.prob_matrix(), in_sol.prob_matrix()
    closed = BidcmSolution.from_graph(g)
    assert np.allclose(qo, closed.q_out[:, None], atol=1e-8)
    n = len(g.user_ids)
    for i in range(n):
        for j in range(n):
            if i != j:
                assert abs(qo[i] @ qi[j] - expected_directed_vmotifs(g, i, j)) < 1e-6


def test_solution_export_is_json_ready():
    import json
    s = fit_bicm(BipartiteGraph.from_matrix(B3))
    doc = json.loads(json.dumps(s.to_dict()))
    assert doc["convergence"]["residual"] <= 1e-8 and len(doc["theta"]) == 3
