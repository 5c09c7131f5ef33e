"""End-to-end community detection pipelines.

``mono``
    Validate the directed user-user repost projection against the directed
    bipartite null model, cluster the leaders' validated subgraph, propagate.
``bi``
    Validate audience overlap between leaders against the bipartite
    configuration model, cluster the validated leader projection, propagate.
``baseline``
    Louvain on the full, unfiltered retweet network.
"""
from __future__ import annotations

import csv
import json
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import community
from .graphs import Partition, WeightedGraph, weakly_connected_component
from .ingest import (DebateDataset, build_leader_audience_bipartite, build_retweet_network,
                     build_user_post_digraph)
from .leaders import LeaderCriterion
from .metrics import beta_grid, completeness, homogeneity, score, vmeasure
from .nullmodels import DEFAULT_TOL, fit_bicm
from .seeding import derive_seed
from .validation import (DEFAULT_ALPHA, ValidatedProjection, score_directed, score_undirected,
                         validated_projection)


class EmptyProjectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    method: str = "mono"
    leaders: LeaderCriterion = field(default_factory=LeaderCriterion)
    alpha: float = DEFAULT_ALPHA
    runs: int = community.DEFAULT_RUNS
    realizations: int = community.DEFAULT_REALIZATIONS
    seed: int = 0
    betas: tuple[float, ...] = (1.0,)
    propagation: str = "lpa"
    weighted_louvain: bool = False
    bicm_tol: float = DEFAULT_TOL
    jobs: int = 1

    def __post_init__(self):
        if self.method not in ("mono", "bi", "baseline"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.propagation not in ("lpa", "plurality"):
            raise ValueError(f"unknown propagation {self.propagation!r}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["betas"] = list(self.betas)
        return out


@dataclass
class PipelineResult:
    method: str
    leaders: list[str]
    leader_partition: Partition
    full_partition: Partition
    projection: ValidatedProjection | None
    timings: dict[str, float]
    config: dict

    def projection_summary(self) -> dict | None:
        if self.projection is None:
            return None
        s = self.projection.summary()
        s["n_leader_nodes"] = len(self.leaders)
        return s

    def summary(self) -> dict:
        return {
            "method": self.method,
            "n_leaders": len(self.leaders),
            "n_leader_communities": self.leader_partition.n_communities,
            "n_users": len(self.full_partition),
            "n_labeled": self.full_partition.n_labeled,
            "n_communities": self.full_partition.n_communities,
            "projection": self.projection_summary(),
            "config": self.config,
        }


@contextmanager
def _timer(timings: dict, key: str):
    t0 = time.perf_counter()
    yield
    timings[key] = timings.get(key, 0.0) + time.perf_counter() - t0


def _cluster(g: WeightedGraph, cfg: PipelineConfig, timings: dict) -> dict[str, int]:
    if g.adj.nnz == 0:
        raise EmptyProjectionError("validated leader graph has no edges")
    with _timer(timings, "louvain"):
        # isolated leaders carry no validated signal; propagation labels them
        linked = np.flatnonzero(np.diff(g.adj.tocsr().indptr) > 0)
        part = community.louvain_best_of(g.subgraph(linked), cfg.runs, derive_seed(cfg.seed, "louvain"))
    return part.to_mapping()


def _propagate(d: DebateDataset, seeds: dict[str, int], cfg: PipelineConfig, timings: dict) -> Partition:
    with _timer(timings, "label_propagation"):
        rt = build_retweet_network(d)
        s = derive_seed(cfg.seed, "propagation")
        if cfg.propagation == "plurality":
            return community.plurality_assignment(rt, seeds, s)
        return community.seeded_label_propagation(rt, seeds, cfg.realizations, s, jobs=cfg.jobs)


def _leader_graph(proj: ValidatedProjection, leaders: list[str], weighted: bool) -> WeightedGraph:
    g = proj.graph(weighted=weighted)
    pos = {u: i for i, u in enumerate(g.ids)}
    return g.subgraph([pos[u] for u in leaders if u in pos])


def _finish(method, d, leaders, seeds, proj, cfg, timings) -> PipelineResult:
    full = _propagate(d, seeds, cfg, timings)
    return PipelineResult(method, leaders, full.restrict(leaders), full, proj, timings, cfg.to_dict())


def run_monodc(d: DebateDataset, cfg: PipelineConfig) -> PipelineResult:
    timings: dict[str, float] = {}
    with _timer(timings, "leader_selection"):
        leaders = cfg.leaders.select(d)
    with _timer(timings, "validation"):
        lset = set(leaders)
        scope = lset | {r for r, _, a in d.reposts if a in lset and r != a}
        dg = build_user_post_digraph(d, scope)
        proj = validated_projection(score_directed(dg), cfg.alpha)
    seeds = _cluster(_leader_graph(proj, leaders, cfg.weighted_louvain), cfg, timings)
    return _finish("mono", d, leaders, seeds, proj, cfg, timings)


def run_bidc(d: DebateDataset, cfg: PipelineConfig) -> PipelineResult:
    timings: dict[str, float] = {}
    with _timer(timings, "leader_selection"):
        leaders = cfg.leaders.select(d)
    with _timer(timings, "validation"):
        bip = build_leader_audience_bipartite(d, leaders)
        sol = fit_bicm(bip, tol=cfg.bicm_tol)
        proj = validated_projection(score_undirected(bip, sol), cfg.alpha)
        proj.meta["bicm"] = {"residual": sol.residual, "iterations": sol.iterations, "method": sol.method}
    seeds = _cluster(_leader_graph(proj, leaders, cfg.weighted_louvain), cfg, timings)
    return _finish("bi", d, leaders, seeds, proj, cfg, timings)


def run_baseline(d: DebateDataset, cfg: PipelineConfig) -> PipelineResult:
    timings: dict[str, float] = {}
    try:
        leaders = cfg.leaders.select(d)
    except ValueError:
        leaders = []
    with _timer(timings, "louvain"):
        rt = build_retweet_network(d)
        full = community.louvain_best_of(rt, cfg.runs, derive_seed(cfg.seed, "louvain"))
    return PipelineResult("baseline", leaders, full.restrict(leaders), full, None, timings, cfg.to_dict())


def run(d: DebateDataset, cfg: PipelineConfig) -> PipelineResult:
    return {"mono": run_monodc, "bi": run_bidc, "baseline": run_baseline}[cfg.method](d, cfg)


def _annotation_partition(d: DebateDataset, ids, level: int) -> Partition:
    names = sorted({d.annotations[u][level] for u in ids})
    code = {x: i for i, x in enumerate(names)}
    return Partition(tuple(ids), np.array([code[d.annotations[u][level]] for u in ids], dtype=np.int64))


def annotation_partition(d: DebateDataset, level: str = "party") -> Partition:
    if not d.annotations:
        raise ValueError("dataset has no annotations")
    return _annotation_partition(d, list(d.annotations), 0 if level == "party" else 1)


def annotation_benchmark(d: DebateDataset) -> dict[str, float]:
    """Modularity of the annotation-induced partitions on the annotated users' GCC."""
    if not d.annotations:
        raise ValueError("dataset has no annotations")
    rt = build_retweet_network(d)
    annotated = [u for u in rt.ids if u in d.annotations]
    if not annotated:
        raise ValueError("no annotated user is active")
    gcc, _ = weakly_connected_component(rt, annotated)
    ids = list(gcc.ids)
    return {
        "party": community.modularity(gcc, _annotation_partition(d, ids, 0)),
        "coalition": community.modularity(gcc, _annotation_partition(d, ids, 1)),
        "n_nodes": len(ids),
    }


def cross_method_vm(a: PipelineResult | Partition, b: PipelineResult | Partition, betas=None,
                    on: str = "leaders") -> dict:
    """VM_beta of ``a`` (as reference) against ``b`` over a beta grid, plus h and c."""
    def pick(x):
        if isinstance(x, Partition):
            return x
        return x.leader_partition if on == "leaders" else x.full_partition

    pa, pb = pick(a), pick(b)
    betas = beta_grid() if betas is None else np.asarray(betas, dtype=float)
    base = score(pa, pb)
    if base["n_colabeled"] == 0:
        raise ValueError("partitions share no labeled nodes")
    return {
        "beta": [float(x) for x in betas],
        "vm": [vmeasure(pa, pb, float(x)) for x in betas],
        "h": homogeneity(pa, pb),
        "c": completeness(pa, pb),
        "n_colabeled": base["n_colabeled"],
    }


def composition_table(p: Partition, d: DebateDataset, level: str = "party") -> list[tuple[int, str, int]]:
    if not d.annotations:
        return []
    k = 0 if level == "party" else 1
    cnt = Counter((int(c), d.annotations[u][k]) for u, c in zip(p.ids, p.labels)
                  if c >= 0 and u in d.annotations)
    return sorted((c, lab, n) for (c, lab), n in cnt.items())


def write_bundle(res: PipelineResult, d: DebateDataset, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "partition": out / "partition.csv",
        "leader_partition": out / "leader_partition.csv",
        "summary": out / "summary.json",
        "timings": out / "timings.json",
        "composition": out / "composition.csv",
    }
    community.write_partition(res.full_partition, paths["partition"])
    community.write_partition(res.leader_partition, paths["leader_partition"])
    if res.projection is not None:
        paths["projection"] = out / "projection.csv"
        paths["projection_meta"] = out / "projection.json"
        res.projection.write(paths["projection"], paths["projection_meta"])
    summary = res.summary()
    if d.annotations:
        summary["vs_annotations"] = {}
        for lvl in ("party", "coalition"):
            ref = annotation_partition(d, lvl)
            if not set(ref.ids) & set(res.leader_partition.to_mapping()):
                continue
            entry = score(ref, res.leader_partition)
            entry["vm_beta"] = {repr(b): vmeasure(ref, res.leader_partition, b) for b in res.config["betas"]}
            summary["vs_annotations"][lvl] = entry
    paths["summary"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    paths["timings"].write_text(json.dumps(res.timings, indent=2, sort_keys=True) + "\n")
    with open(paths["composition"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["community", "label", "count"])
        w.writerows(composition_table(res.full_partition, d))
    return paths
