"""Leader-anchored discursive-community detection on repost data."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .graphs import BipartiteGraph, DirectedBipartiteGraph, Partition, WeightedDigraph, WeightedGraph
from .ingest import DebateDataset, load_dataset
from .leaders import LeaderCriterion
from .metrics import completeness, homogeneity, vmeasure
from .nullmodels import fit_bicm
from .pipelines import PipelineConfig, run
from .synth import SynthConfig, generate
from .validation import validated_projection

__all__ = [
    "BipartiteGraph", "DirectedBipartiteGraph", "Partition", "WeightedDigraph", "WeightedGraph",
    "DebateDataset", "load_dataset", "LeaderCriterion", "completeness", "homogeneity", "vmeasure",
    "fit_bicm", "PipelineConfig", "run", "SynthConfig", "generate", "validated_projection",
]
