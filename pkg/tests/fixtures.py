"""Shared synthetic datasets and pipeline runs, built once per process."""
from __future__ import annotations

import functools
import time
from dataclasses import dataclass

from discomm.pipelines import PipelineConfig, PipelineResult, run
from discomm.synth import SynthConfig, SynthResult, generate

SEEDS = tuple(range(10))
METHODS = ("mono", "bi", "baseline")


@dataclass
class SeedRun:
    seed: int
    synth: SynthResult
    results: dict[str, PipelineResult]
    seconds: dict[str, float]


@functools.lru_cache(maxsize=None)
def standard_dataset(seed: int) -> SynthResult:
    return generate(SynthConfig(seed=seed))


@functools.lru_cache(maxsize=None)
def standard_runs() -> tuple[SeedRun, ...]:
    out = []
    for s in SEEDS:
        t0 = time.perf_counter()
        syn = standard_dataset(s)
        gen = time.perf_counter() - t0
        results, seconds = {}, {}
        for m in METHODS:
            t0 = time.perf_counter()
            results[m] = run(syn.dataset, PipelineConfig(method=m, seed=s))
            seconds[m] = gen + time.perf_counter() - t0
        out.append(SeedRun(s, syn, results, seconds))
    return tuple(out)
