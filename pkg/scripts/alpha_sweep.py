"""Sensitivity of the validated projections and leader partitions to alpha.

    python3 scripts/alpha_sweep.py --method bi --seeds 3
"""
import argparse
import csv
import itertools
import sys

from discomm.metrics import vmeasure
from discomm.pipelines import PipelineConfig, run
from discomm.synth import SynthConfig, generate
from discomm.validation import ALPHA_SWEEP


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--method", choices=("mono", "bi"), default="mono")
    ap.add_argument("--alphas", default=",".join(str(a) for a in ALPHA_SWEEP))
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args(argv)

    alphas = [float(a) for a in args.alphas.split(",")]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["seed", "alpha_a", "alpha_b", "edges_a", "edges_b", "nested", "leader_vm"])
    for seed in range(args.seeds):
        syn = generate(SynthConfig(epsilon=args.epsilon, seed=seed))
        res = {a: run(syn.dataset, PipelineConfig(method=args.method, alpha=a, seed=seed)) for a in alphas}
        for a, b in itertools.combinations(alphas, 2):
            ea, eb = res[a].projection.edge_set(), res[b].projection.edge_set()
            lo, hi = (ea, eb) if a < b else (eb, ea)
            w.writerow([seed, a, b, len(ea), len(eb), lo <= hi,
                        f"{vmeasure(res[a].leader_partition, res[b].leader_partition):.4f}"])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
