"""Graphviz DOT rendering of abstract CTMCs and analysed pruned graphs."""

from __future__ import annotations

from .abstraction import AbstractCTMC
from .analysis import AnalysisReport
from .pruning import PrunedGraph

# colour per iteration index, cycled; iteration-less edges are grey
PALETTE = ("black", "red", "orange", "blue", "darkgreen", "purple", "brown", "magenta", "cyan4", "gold3")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _header(name: str) -> list[str]:
    return [f"digraph {_quote(name)} {{", "  rankdir=LR;", "  node [shape=box, fontname=Helvetica];"]


def _nodes(actmc: AbstractCTMC, states) -> list[str]:
    lines = []
    for s in states:
        attrs = [f"label={_quote(actmc.state_label(s))}"]
        if s == actmc.initial:
            attrs.append("peripheries=2")
        lines.append(f"  n{actmc.order[s]} [{', '.join(attrs)}];")
    return lines


def _edge(actmc: AbstractCTMC, k: int, extra: list[str]) -> str:
    t = actmc.transitions[k]
    attrs = [f"label={_quote(f'{t.reaction}, 10^{t.magnitude}')}"] + extra
    return f"  n{actmc.order[t.source]} -> n{actmc.order[t.target]} [{', '.join(attrs)}];"


def export_dot(actmc: AbstractCTMC, pruned: PrunedGraph | None = None, name: str = "abstraction") -> str:
    """All states and transitions; with ``pruned`` given, pruned-out edges are dashed."""
    lines = _header(name) + _nodes(actmc, actmc.states)
    for k in range(len(actmc.transitions)):
        extra = []
        if pruned is not None and k not in pruned.kept:
            extra.append("style=dashed")
        lines.append(_edge(actmc, k, extra))
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_report_dot(report: AnalysisReport, name: str = "pruned") -> str:
    """Kept edges plus analysed exits, coloured by the iteration that reached them.

    Exit transitions (not kept) are dashed. Edges never reached by the analysis are grey.
    """
    actmc = report.ctmc
    kept = report.pruned.kept
    exits = {e.transition for e in report.exits}
    lines = _header(name) + _nodes(actmc, actmc.states)
    for k in range(len(actmc.transitions)):
        if k not in kept and k not in exits:
            continue
        it = report.edge_iteration.get(k)
        colour = "grey" if it is None else PALETTE[it % len(PALETTE)]
        extra = [f"color={colour}", f"fontcolor={colour}", f"class={_quote('unreached' if it is None else f'iter{it}')}"]
        if k not in kept:
            extra.append("style=dashed")
        lines.append(_edge(actmc, k, extra))
    lines.append("}")
    return "\n".join(lines) + "\n"
