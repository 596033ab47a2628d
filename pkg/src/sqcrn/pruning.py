"""n-pruning: per state, keep the transitions within ``n`` orders of magnitude of the fastest one."""

from __future__ import annotations

from dataclasses import dataclass

from .abstraction import AbstractCTMC


@dataclass(frozen=True)
class PrunedGraph:
    ctmc: AbstractCTMC
    kept: frozenset[int]
    level: int

    def kept_out(self, s) -> list[int]:
        return [k for k in self.ctmc.outgoing[s] if k in self.kept]

    def pruned_out(self, s) -> list[int]:
        return [k for k in self.ctmc.outgoing[s] if k not in self.kept]

    def successors(self, s) -> list:
        return [self.ctmc.transitions[k].target for k in self.kept_out(s)]


def prune(actmc: AbstractCTMC, n: int = 0) -> PrunedGraph:
    if n < 0:
        raise ValueError("pruning level must be >= 0")
    kept = set()
    for s in actmc.states:
        out = actmc.outgoing[s]
        if not out:
            continue
        mags = {k: actmc.transitions[k].magnitude for k in out}
        top = max(mags.values())
        kept.update(k for k, m in mags.items() if m >= top - n)
    return PrunedGraph(actmc, frozenset(kept), n)
