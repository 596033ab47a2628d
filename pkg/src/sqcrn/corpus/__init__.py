"""Bundled case-study models, their partition configs, and a small hand-built abstract CTMC."""

from __future__ import annotations

from importlib import resources

from ..abstraction import AbstractCTMC
from ..config import AnalysisConfig, parse_config
from ..crn import CRN, parse_crn

MODELS = ("degradation", "gene_slow", "gene_fast", "goutsias", "viral")
CONFIGS = ("degradation", "gene_coarse", "gene_refined", "goutsias", "viral")


def path(name: str):
    """Filesystem path of a bundled file, e.g. ``path("viral.crn")``."""
    return resources.files(__name__).joinpath(name)


def model(name: str) -> CRN:
    return parse_crn(path(f"{name}.crn").read_text(encoding="utf-8"))


def config(name: str) -> AnalysisConfig:
    return parse_config(path(f"{name}.cfg").read_text(encoding="utf-8"))


BRANCHING_STATES = ("s0", "s1", "s2", "s3", "t", "u")


def branching_ctmc(scale=1) -> AbstractCTMC:
    """Six-state example: a fast 3-cycle entered from s0, with slow exits back and towards u.

    Solid (kept at n=0) edges: s0->s1, s0->t, and the cycle s1->s2->s3->s1.
    The remaining edges are an order of magnitude slower than the fastest edge
    of their source. ``scale`` multiplies every rate.
    """
    edges = [
        ("s0", "a", "s1", 1),
        ("s0", "b", "t", 1),
        ("s1", "c", "s2", 10),
        ("s2", "d", "s3", 10),
        ("s2", "e", "s0", 1),
        ("s3", "f", "s1", 100),
        ("s3", "g", "s1", 10),
        ("s3", "h", "u", 10),
    ]
    return AbstractCTMC.from_edges(BRANCHING_STATES, [(s, l, t, r * scale) for s, l, t, r in edges], "s0")
