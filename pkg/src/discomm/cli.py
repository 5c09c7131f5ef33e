"""Command-line entry point.

Every command writes into ``--out`` through a temporary sibling directory that
is moved into place only on success, together with one ``manifest.json``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import itertools
import json
import logging
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path

from . import __version__, pipelines
from .graphs import GraphError, Partition
from .ingest import IngestError, load_dataset, write_dataset
from .leaders import DEFAULT_HINDEX_THRESHOLD, LeaderCriterion, LeaderError, hindex_table
from .metrics import beta_grid, completeness, homogeneity, vmeasure
from .community import read_partition
from .nullmodels import ConvergenceError
from .synth import SynthConfig, generate, read_ground_truth
from .validation import ALPHA_SWEEP, DEFAULT_ALPHA

log = logging.getLogger("discomm")

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_EMPTY = 0, 2, 3, 4


def _floats(text: str) -> list[float]:
    try:
        out = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class OutputDir:
    """Stage outputs in a temp dir; publish into ``target`` on success only."""

    def __init__(self, target):
        self.target = Path(target)
        self.tmp: Path | None = None

    def __enter__(self) -> Path:
        self.target.parent.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=f".{self.target.name}.", dir=self.target.parent))
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.target.mkdir(parents=True, exist_ok=True)
            for f in sorted(self.tmp.iterdir()):
                os.replace(f, self.target / f.name)
        shutil.rmtree(self.tmp, ignore_errors=True)
        return False


def write_manifest(out: Path, command: str, config: dict, inputs: dict, seed, timings: dict) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config": config,
        "inputs": {k: {"path": str(p), "sha256": sha256(p)} for k, p in inputs.items() if p},
        "timings": timings,
        "outputs": sorted(f.name for f in out.iterdir()),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _inputs(args) -> dict:
    return {"events": args.events, "users": args.users, "annotations": getattr(args, "annotations", None)}


def _pipeline_config(args, alpha=None) -> pipelines.PipelineConfig:
    return pipelines.PipelineConfig(
        method=args.method,
        leaders=LeaderCriterion.parse(args.leaders, args.hindex_threshold),
        alpha=args.alpha if alpha is None else alpha,
        runs=args.runs,
        realizations=args.realizations,
        seed=args.seed,
        betas=tuple(args.beta),
        propagation=args.propagation,
        weighted_louvain=args.weighted,
        jobs=args.jobs,
    )


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        n_parties=args.parties, leaders_per_party=args.leaders_per_party, n_audience=args.audience,
        epsilon=args.epsilon, gamma=args.gamma, audience_coalition_share=args.coalition_share,
        broadcaster_share=args.broadcaster_share, seed=args.seed,
    )
    t0 = time.perf_counter()
    res = generate(cfg)
    elapsed = time.perf_counter() - t0
    with OutputDir(args.out) as out:
        res.write(out)
        (out / "audit.json").write_text(json.dumps(res.audit, indent=2, sort_keys=True) + "\n")
        write_manifest(out, "synth", res.audit["config"], {}, args.seed, {"generate": elapsed})
    log.info("wrote %d events for %d users to %s", len(res.dataset.posts), len(res.party), args.out)
    return EXIT_OK


def cmd_ingest(args) -> int:
    t0 = time.perf_counter()
    d = load_dataset(args.events, args.users, args.annotations, args.max_malformed)
    elapsed = time.perf_counter() - t0
    h = hindex_table(d)
    report = {
        "n_events": len(d.posts),
        "n_originals": len(d.originals),
        "n_reposts": len(d.reposts),
        "n_self_reposts": d.n_self_reposts,
        "n_users": len(d.users),
        "n_active_users": len(d.active_users),
        "n_verified_active": sum(1 for u in d.active_users if d.users[u].verified),
        "n_hindex_at_least_threshold": sum(1 for v in h.values() if v >= args.hindex_threshold),
        "n_annotated": len(d.annotations or {}),
        "quarantine": d.quarantine,
    }
    with OutputDir(args.out) as out:
        write_dataset(d, out / "events.jsonl", out / "users.csv",
                      out / "annotations.csv" if d.annotations else None)
        (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        write_manifest(out, "ingest", {"max_malformed": args.max_malformed,
                                       "hindex_threshold": args.hindex_threshold},
                       _inputs(args), None, {"load": elapsed})
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = _pipeline_config(args)
    d = load_dataset(args.events, args.users, args.annotations)
    res = pipelines.run(d, cfg)
    with OutputDir(args.out) as out:
        pipelines.write_bundle(res, d, out)
        write_manifest(out, "pipeline", cfg.to_dict(), _inputs(args), cfg.seed, res.timings)
    log.info("%s: %d leaders in %d communities", cfg.method, len(res.leaders),
             res.leader_partition.n_communities)
    return EXIT_OK


def _truth_partition(path, level: str) -> Partition:
    party, coalition = read_ground_truth(path)
    table = party if level == "party" else coalition
    names = sorted(set(table.values()))
    code = {x: i for i, x in enumerate(names)}
    return Partition.from_mapping({u: code[x] for u, x in table.items()})


def cmd_eval(args) -> int:
    a = read_partition(args.a)
    b = read_partition(args.b) if args.b else _truth_partition(args.truth, args.level)
    rows = [{"beta": beta, "vm": vmeasure(a, b, beta)} for beta in args.beta]
    result = {"h": homogeneity(a, b), "c": completeness(a, b), "vm": rows}
    print(json.dumps(result, sort_keys=True))
    if args.out:
        with OutputDir(args.out) as out:
            (out / "eval.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
            write_manifest(out, "eval", {"level": args.level, "beta": args.beta},
                           {"a": args.a, "b": args.b, "truth": args.truth}, None, {})
    return EXIT_OK


def cmd_benchmark(args) -> int:
    if not args.annotations:
        raise IngestError("benchmark needs --annotations")
    d = load_dataset(args.events, args.users, args.annotations)
    t0 = time.perf_counter()
    result = pipelines.annotation_benchmark(d)
    elapsed = time.perf_counter() - t0
    print(json.dumps(result, sort_keys=True))
    with OutputDir(args.out) as out:
        (out / "benchmark.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
        write_manifest(out, "benchmark", {}, _inputs(args), None, {"benchmark": elapsed})
    return EXIT_OK


def _sweep_alpha(args, d, out: Path) -> dict:
    if args.method == "baseline":
        raise ValueError("the baseline has no significance level to sweep")
    results, timings = {}, {}
    for alpha in args.alphas:
        res = pipelines.run(d, _pipeline_config(args, alpha))
        results[alpha] = res
        timings[f"alpha={alpha}"] = res.timings
        pipelines.community.write_partition(res.leader_partition, out / f"leader_partition_alpha{alpha}.csv")
    rows = []
    for alpha, res in results.items():
        row = {"alpha": alpha, "n_edges": res.projection.n_edges,
               "retention_ratio": res.projection.retention_ratio,
               "n_leader_communities": res.leader_partition.n_communities}
        if d.annotations:
            for lvl in ("party", "coalition"):
                row[f"vm_{lvl}"] = vmeasure(pipelines.annotation_partition(d, lvl), res.leader_partition)
        rows.append(row)
    _write_rows(out / "sweep.csv", rows)
    pairs = []
    for a1, a2 in itertools.combinations(sorted(results), 2):
        pairs.append({"alpha_a": a1, "alpha_b": a2,
                      "vm": vmeasure(results[a1].leader_partition, results[a2].leader_partition),
                      "nested": results[a1].projection.edge_set() <= results[a2].projection.edge_set()})
    _write_rows(out / "pairwise.csv", pairs)
    return timings


def _sweep_beta(args, d, out: Path) -> dict:
    if not d.annotations:
        raise IngestError("a beta sweep needs --annotations")
    res = pipelines.run(d, _pipeline_config(args))
    rows = []
    for beta in args.betas:
        row = {"beta": beta}
        for lvl in ("party", "coalition"):
            row[f"vm_{lvl}"] = vmeasure(pipelines.annotation_partition(d, lvl), res.leader_partition, beta)
        rows.append(row)
    _write_rows(out / "sweep.csv", rows)
    pipelines.community.write_partition(res.leader_partition, out / "leader_partition.csv")
    return res.timings


def _write_rows(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def cmd_sweep(args) -> int:
    if len(args.alpha) > 1 and args.alphas is None:
        args.alphas = args.alpha
    args.alpha = args.alpha[0]
    if (args.alphas is None) == (args.betas is None):
        raise ValueError("give exactly one of --alphas or --betas")
    d = load_dataset(args.events, args.users, args.annotations)
    with OutputDir(args.out) as out:
        timings = _sweep_alpha(args, d, out) if args.alphas is not None else _sweep_beta(args, d, out)
        cfg = _pipeline_config(args).to_dict()
        cfg["sweep"] = {"alphas": args.alphas, "betas": args.betas}
        write_manifest(out, "sweep", cfg, _inputs(args), args.seed, timings)
    print((Path(args.out) / "sweep.csv").read_text(), end="")
    return EXIT_OK


def _add_inputs(p: argparse.ArgumentParser, annotations_required: bool = False) -> None:
    p.add_argument("--events", required=True, help="JSON-lines event log")
    p.add_argument("--users", required=True, help="user metadata CSV")
    p.add_argument("--annotations", required=annotations_required, help="user_id,party,coalition CSV")


def _add_pipeline_flags(p: argparse.ArgumentParser, sweep: bool = False) -> None:
    p.add_argument("--method", choices=("mono", "bi", "baseline"), default="mono")
    p.add_argument("--leaders", default="verified", help="verified | influential | hindex | file:PATH")
    p.add_argument("--hindex-threshold", type=int, default=DEFAULT_HINDEX_THRESHOLD)
    if sweep:
        p.add_argument("--alpha", type=_floats, default=[DEFAULT_ALPHA], help="one value, or a list to sweep")
    else:
        p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--beta", type=_floats, default=[1.0], help="comma-separated VM weights")
    p.add_argument("--runs", type=int, default=pipelines.community.DEFAULT_RUNS)
    p.add_argument("--realizations", type=int, default=pipelines.community.DEFAULT_REALIZATIONS)
    p.add_argument("--propagation", choices=("lpa", "plurality"), default="lpa")
    p.add_argument("--weighted", action="store_true", help="weight Louvain by V-motif counts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discomm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a planted-partition dataset")
    p.add_argument("--parties", type=int, default=6)
    p.add_argument("--leaders-per-party", type=int, default=10)
    p.add_argument("--audience", type=int, default=5000)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.8)
    p.add_argument("--coalition-share", type=float, default=SynthConfig.audience_coalition_share)
    p.add_argument("--broadcaster-share", type=float, default=SynthConfig.broadcaster_share)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate input files and report what they contain")
    _add_inputs(p)
    p.add_argument("--max-malformed", type=float, default=0.01)
    p.add_argument("--hindex-threshold", type=int, default=DEFAULT_HINDEX_THRESHOLD)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pipeline", help="run one detection pipeline")
    _add_inputs(p)
    _add_pipeline_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("eval", help="VM between two partitions, or a partition and ground truth")
    p.add_argument("--a", required=True, help="partition CSV (reference)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--b", help="partition CSV")
    g.add_argument("--truth", help="ground_truth.csv or annotations.csv")
    p.add_argument("--level", choices=("party", "coalition"), default="party")
    p.add_argument("--beta", type=_floats, default=[1.0])
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("benchmark", help="modularity of annotation partitions on the annotated GCC")
    _add_inputs(p, annotations_required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("sweep", help="repeat a pipeline over an alpha or beta grid")
    _add_inputs(p)
    _add_pipeline_flags(p, sweep=True)
    p.add_argument("--alphas", type=_floats, nargs="?", const=list(ALPHA_SWEEP))
    p.add_argument("--betas", type=_floats, nargs="?", const=[float(b) for b in beta_grid()])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "eval" and args.truth is None and args.level != "party":
        log.warning("--level is ignored without --truth")
    try:
        return args.func(args)
    except ConvergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except pipelines.EmptyProjectionError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_EMPTY
    except IngestError as e:
        print(f"error: {e}", file=sys.stderr)
        for line in e.errors[:20]:
            print(f"  {line}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, LeaderError, GraphError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
