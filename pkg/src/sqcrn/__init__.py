"""Semi-quantitative abstraction and analysis of stochastic chemical reaction networks."""

from .abstraction import (
    AbstractCTMC,
    LevelPartition,
    build_abstraction,
    make_partition,
    magnitude,
    time_magnitude,
)
from .analysis import AnalysisReport, analyze
from .config import AnalysisConfig, load_config, parse_config
from .crn import CRN, Reaction, load_crn, parse_crn
from .pruning import PrunedGraph, prune

__version__ = "0.1.0"

__all__ = [
    "AbstractCTMC",
    "AnalysisConfig",
    "AnalysisReport",
    "CRN",
    "LevelPartition",
    "PrunedGraph",
    "Reaction",
    "analyze",
    "build_abstraction",
    "load_config",
    "load_crn",
    "magnitude",
    "make_partition",
    "parse_config",
    "parse_crn",
    "prune",
    "time_magnitude",
]
