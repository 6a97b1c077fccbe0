"""Black-box prioritization of simulation-based driving test suites."""

from .evaluation import FaultProfile, a12, apfd_c, detection_curve, magnitude, wilcoxon_rank_sum
from .features import PcaModel, pca_fit, pca_project, zscore_fit_apply
from .prioritizers import GaConfig, fitness, ga_run, greedy_order, random_order
from .scenario import RoadScenario, RoadSegment, extract_features, load_corpus

__version__ = "0.1.0"

__all__ = [
    "FaultProfile",
    "GaConfig",
    "PcaModel",
    "RoadScenario",
    "RoadSegment",
    "a12",
    "apfd_c",
    "detection_curve",
    "extract_features",
    "fitness",
    "ga_run",
    "greedy_order",
    "load_corpus",
    "magnitude",
    "pca_fit",
    "pca_project",
    "random_order",
    "wilcoxon_rank_sum",
    "zscore_fit_apply",
]
