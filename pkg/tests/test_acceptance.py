"""The twelve acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line that ``conftest`` prints after the run.
Criteria that cannot hold are strict xfails, so they stay red if they fail and
break the build if they ever start passing.
"""
import itertools
import statistics
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from discomm.community import write_partition
from discomm.ingest import DebateDataset, PostEvent, build_user_post_digraph
from discomm.metrics import contingency, entropies, homogeneity, noise_curve, variation_of_information, vmeasure
from discomm.nullmodels import expected_undirected_vmotifs, fit_bicm, fit_bidcm_layers
from discomm.pipelines import PipelineConfig, annotation_benchmark, run
from discomm.synth import SynthConfig, generate
from discomm.validation import fdr_select, poisson_pvalue
from fixtures import standard_dataset
from oracles import bh_bruteforce, ensemble_means, poisson_binomial_tail


def record(k: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[k] = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def test_01_bicm_fit_fidelity():
    rng = np.random.default_rng(101)
    worst_res, worst_t = 0.0, 0.0
    for g in range(20):
        shape = (100, 400) if g < 5 else (int(rng.integers(5, 101)), int(rng.integers(20, 401)))
        dens = rng.uniform(0.02, 0.3)
        b = (rng.random(shape) < dens).astype(np.int64)
        t0 = time.perf_counter()
        p = fit_bicm(b).prob_matrix()
        worst_t = max(worst_t, time.perf_counter() - t0)
        res = max(np.abs(p.sum(1) - b.sum(1)).max(), np.abs(p.sum(0) - b.sum(0)).max())
        worst_res = max(worst_res, res)
    ok = worst_res <= 1e-6 and worst_t < 5
    record(1, ok, f"max degree residual {worst_res:.2e}, slowest fit {worst_t:.2f}s")
    assert ok


def test_02_exhaustive_ensemble_oracle():
    worst_deg = worst_v = 0.0
    n_graphs = 0
    for bits in range(1, 512):
        b = np.array([(bits >> i) & 1 for i in range(9)]).reshape(3, 3)
        s = fit_bicm(b)
        k, h, co = ensemble_means(s.theta, s.eta, b)
        worst_deg = max(worst_deg, np.abs(k - b.sum(1)).max(), np.abs(h - b.sum(0)).max())
        for i, j in itertools.combinations(range(3), 2):
            worst_v = max(worst_v, abs(expected_undirected_vmotifs(s, i, j) - co[i, j]))
        n_graphs += 1
    ok = worst_deg <= 1e-6 and worst_v <= 1e-6
    record(2, ok, f"{n_graphs} graphs, degree error {worst_deg:.1e}, V-motif error {worst_v:.1e}")
    assert ok


def _small_directed(rng):
    n_users, n_posts = int(rng.integers(3, 9)), int(rng.integers(4, 16))
    events = [PostEvent(f"p{a}", f"u{rng.integers(n_users)}") for a in range(n_posts)]
    for a in range(n_posts):
        for u in range(n_users):
            if rng.random() < 0.35:
                events.append(PostEvent(f"r{a}_{u}", f"u{u}", f"p{a}"))
    return build_user_post_digraph(DebateDataset.from_events(events))


def test_03_directed_closed_form():
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(10):
        g = _small_directed(rng)
        out_sol, in_sol = fit_bidcm_layers(g)
        fitted = out_sol.prob_matrix() @ in_sol.prob_matrix().T
        closed = np.outer(g.kappa_out, g.kappa_in) / g.n_posts
        worst = max(worst, np.abs(fitted - closed).max())
    ok = worst <= 1e-6
    record(3, ok, f"10 instances, max |sum q_out q_in - k_out k_in / N| {worst:.1e}")
    assert ok


def _poisson_gaps():
    # n ~ U{1..200}, p_i ~ U(0, 0.1), rescaled so lambda <= 5, v ~ U{0..min(n, 15)}
    rng = np.random.default_rng(404)
    gaps = []
    for _ in range(1000):
        n = int(rng.integers(1, 201))
        p = rng.uniform(0, 0.1, n)
        if p.sum() > 5:
            p *= 5 / p.sum()
        v = int(rng.integers(0, min(n, 15) + 1))
        gaps.append(abs(poisson_pvalue(v, p.sum()) - poisson_binomial_tail(v, p)))
    return np.array(gaps)


@pytest.mark.xfail(strict=True, reason="a 1e-3 uniform gap is unattainable at p = 0.1; the gap scales like "
                                        "sum p_i^2 / lambda and reaches about 0.019 for ten events at p = 0.1")
def test_04_poisson_approximation():
    gaps = _poisson_gaps()
    bad = int((gaps > 1e-3).sum())
    record(4, bad == 0, f"max gap {gaps.max():.4f}, {bad}/1000 cases above 1e-3")
    assert bad == 0


def test_05_fdr_oracle():
    rng = np.random.default_rng(505)
    mismatches = 0
    for _ in range(10_000):
        k = int(rng.integers(1, 40))
        ps = rng.random(k) ** rng.uniform(1, 6)
        if rng.random() < 0.3:
            ps = np.round(ps, 2)  # ties
        m = k + int(rng.integers(0, 40))
        alpha = float(rng.uniform(0.001, 0.2))
        _, sel = fdr_select(ps, alpha, m)
        mismatches += set(np.flatnonzero(sel)) != bh_bruteforce(list(ps), alpha, m)
    record(5, mismatches == 0, f"{mismatches}/10000 selected sets differ from brute force")
    assert mismatches == 0


_identities = [None]


def _random_partition(rng, n):
    return rng.integers(0, int(rng.integers(1, 6)), n)


def test_06_vmeasure_identities():
    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 80))
        p, q = _random_partition(rng, n), _random_partition(rng, n)
        beta = float(np.exp(rng.uniform(-3, 3)))
        worst = max(worst, abs(vmeasure(p, q) - vmeasure(q, p)),
                    abs(vmeasure(p, q, beta) - vmeasure(q, p, 1 / beta)))
        sp_, sq, _ = entropies(contingency(p, q))
        if sp_ + sq > 0:
            worst = max(worst, abs(vmeasure(p, q) - (1 - variation_of_information(p, q) / (sp_ + sq))))
    ok = worst <= 1e-12
    _identities[0] = (ok, worst)
    record(6, ok, f"identities max error {worst:.1e}; triangle inequality not yet run")
    assert ok


def _triangle_violations():
    rng = np.random.default_rng(616)
    bad, worst = 0, 0.0
    for _ in range(10_000):
        n = int(rng.integers(2, 30))
        a, b, c = (_random_partition(rng, n) for _ in range(3))
        d = lambda x, y: 1 - vmeasure(x, y)
        excess = d(a, c) - d(a, b) - d(b, c)
        if excess > 1e-12:
            bad += 1
            worst = max(worst, excess)
    return bad, worst


@pytest.mark.xfail(strict=True, reason="1 - VM_1 is not a metric: P=(0,0,1), R=(0,1,2), Q=(0,1,0) give "
                                        "d(P,Q)=0.726 > d(P,R)+d(R,Q)=0.533")
def test_06_triangle_inequality():
    bad, worst = _triangle_violations()
    ident = _identities[0]
    ident_txt = "identities not run" if ident is None else (
        f"identities {'hold' if ident[0] else 'FAIL'} (max error {ident[1]:.1e})")
    record(6, bad == 0 and ident is not None and ident[0],
           f"{ident_txt}; triangle inequality violated in {bad}/10000 triples (worst excess {worst:.3f})")
    assert bad == 0


def test_07_noise_curve():
    lab = np.repeat(np.arange(5), 20_000)
    t0 = time.perf_counter()
    at5, at12 = noise_curve(lab, [0.05, 0.12], trials=50, seed=7)
    dt = time.perf_counter() - t0
    ok = 0.75 <= at5 <= 0.85 and 0.53 <= at12 <= 0.67 and dt < 60
    record(7, ok, f"VM1 {at5:.4f} at 5%, {at12:.4f} at 12%, {dt:.1f}s")
    assert ok


def _leader_scores(standard_runs):
    rows = []
    for r in standard_runs:
        s, res = r.synth, r.results
        L = s.leaders
        rows.append({
            "mono_party": vmeasure(s.truth("party", L), res["mono"].leader_partition),
            "bi_coal": vmeasure(s.truth("coalition", L), res["bi"].leader_partition),
            "refine": homogeneity(res["bi"].leader_partition, res["mono"].leader_partition),
            "base_party": vmeasure(s.truth("party", L), res["baseline"].leader_partition),
            "base_coal": vmeasure(s.truth("coalition", L), res["baseline"].leader_partition),
            "seconds": sum(r.seconds.values()),
        })
    return {k: [row[k] for row in rows] for k in rows[0]}


def test_08_planted_recovery(standard_runs):
    sc = _leader_scores(standard_runs)
    med = {k: statistics.median(v) for k, v in sc.items()}
    slowest = max(sc["seconds"])
    ok = med["mono_party"] >= 0.9 and med["bi_coal"] >= 0.85 and med["refine"] >= 0.9 and slowest < 120
    record(8, ok, f"medians: mono/parties {med['mono_party']:.3f}, bi/coalitions {med['bi_coal']:.3f}, "
                  f"refinement h {med['refine']:.3f}; slowest seed {slowest:.1f}s for all three methods")
    assert ok


def test_09_baseline_ordering(standard_runs):
    sc = _leader_scores(standard_runs)
    med = {k: statistics.median(v) for k, v in sc.items()}
    ok = med["base_party"] < med["mono_party"] and med["base_coal"] < med["bi_coal"]
    record(9, ok, f"parties: baseline {med['base_party']:.3f} < mono {med['mono_party']:.3f}; "
                  f"coalitions: baseline {med['base_coal']:.3f} < bi {med['bi_coal']:.3f}")
    assert ok


def test_10_alpha_robustness(standard_runs):
    alphas = (0.001, 0.01, 0.05)
    worst_vm, nested = 1.0, True
    for r in standard_runs:
        for m in ("mono", "bi"):
            res = {a: (r.results[m] if a == 0.01 else
                       run(r.synth.dataset, PipelineConfig(method=m, alpha=a, seed=r.seed))) for a in alphas}
            for a, b in itertools.combinations(alphas, 2):
                worst_vm = min(worst_vm, vmeasure(res[a].leader_partition, res[b].leader_partition))
                nested &= res[a].projection.edge_set() <= res[b].projection.edge_set()
    ok = worst_vm >= 0.9 and nested
    record(10, ok, f"{len(standard_runs)} seeds x 2 methods: min pairwise VM1 {worst_vm:.3f}, "
                   f"projections {'nested' if nested else 'NOT nested'}")
    assert ok


_benchmark = {}


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.1])
def test_11_annotation_modularity(eps):
    qs = [annotation_benchmark(generate(SynthConfig(epsilon=eps, seed=s)).dataset)["party"] for s in (0, 1, 2)]
    _benchmark[eps] = min(qs)
    _record_11()
    assert min(qs) > 0.6


@pytest.mark.xfail(strict=True, reason="at eps = 0 leaders only repost their own party, so the annotated "
                                        "network's largest component holds one party and Q is 0 by definition")
def test_11_annotation_modularity_noiseless():
    _benchmark[0.0] = annotation_benchmark(generate(SynthConfig(epsilon=0.0, seed=0)).dataset)["party"]
    _record_11()
    assert _benchmark[0.0] > 0.6


def _record_11():
    txt = ", ".join(f"eps={e}: {q:.3f}" for e, q in sorted(_benchmark.items()))
    record(11, all(q > 0.6 for q in _benchmark.values()), f"min Q(parties) over seeds: {txt}")


_determinism = {}


@pytest.mark.parametrize("method", ["mono", "bi", "baseline"])
def test_12_determinism(tmp_path, method):
    d = standard_dataset(0).dataset
    blobs = []
    for rep in range(2):
        res = run(d, PipelineConfig(method=method, seed=11))
        for name, part in (("full", res.full_partition), ("leaders", res.leader_partition)):
            write_partition(part, tmp_path / f"{name}{rep}.csv")
        blobs.append(((tmp_path / f"full{rep}.csv").read_bytes(), (tmp_path / f"leaders{rep}.csv").read_bytes()))
    same = blobs[0] == blobs[1]
    _determinism[method] = same
    record(12, all(_determinism.values()) and len(_determinism) == 3,
           ", ".join(f"{m}: {'identical' if v else 'DIFFERENT'}" for m, v in _determinism.items()))
    assert same

