"""Desk-scale comparison of reported magnitudes against the bounded concrete CTMC."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .abstraction import AbstractCTMC, LevelPartition, abstract, build_abstraction, magnitude, time_magnitude
from .analysis import CONFIRMED, AnalysisReport, analyze
from .crn import CRN
from .ctmc import (
    DEFAULT_STATE_LIMIT,
    IllConditionedError,
    ConcreteCTMC,
    StateSpaceOverflow,
    bscc_steady_state,
    build_bounded_ctmc,
    hitting_times_from_rates,
    mean_hitting_time,
    ssa_frequency,
)
from .pruning import prune


@dataclass(frozen=True)
class Comparison:
    kind: str  # hitting-time | steady-state | branch
    subject: str
    abstract_magnitude: int | None
    oracle_magnitude: int | None
    status: str  # ok | skipped
    note: str = ""

    @property
    def delta(self) -> int | None:
        if self.abstract_magnitude is None or self.oracle_magnitude is None:
            return None
        return abs(self.abstract_magnitude - self.oracle_magnitude)

    def line(self) -> str:
        if self.status != "ok":
            return f"{self.kind:13} {self.subject}: skipped ({self.note})"
        return (
            f"{self.kind:13} {self.subject}: abstract 10^{self.abstract_magnitude}, "
            f"oracle 10^{self.oracle_magnitude}, |delta| {self.delta}"
        )


def abstract_rate_matrix(actmc: AbstractCTMC) -> sp.csr_matrix:
    """Effective transition rates of the abstract chain as a sparse matrix in state order."""
    n = len(actmc.states)
    rows = [actmc.order[t.source] for t in actmc.transitions]
    cols = [actmc.order[t.target] for t in actmc.transitions]
    vals = [float(t.rate) for t in actmc.transitions]
    R = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    R.sum_duplicates()
    return R


def abstract_hitting_time(actmc: AbstractCTMC, targets) -> float:
    """Expected time for the abstract chain to reach ``targets`` from its initial state."""
    mask = np.zeros(len(actmc.states), dtype=bool)
    for s in targets:
        mask[actmc.order[s]] = True
    return float(hitting_times_from_rates(abstract_rate_matrix(actmc), mask)[actmc.order[actmc.initial]])


def _concrete_bsccs(ctmc: ConcreteCTMC) -> list[np.ndarray]:
    n_comp, labels = sp.csgraph.connected_components(ctmc.rates, directed=True, connection="strong")
    coo = ctmc.rates.tocoo()
    leaves = np.zeros(n_comp, dtype=bool)
    mask = (labels[coo.row] != labels[coo.col]) & (coo.data > 0)
    leaves[labels[coo.row[mask]]] = True
    return [np.flatnonzero(labels == c) for c in range(n_comp) if not leaves[c]]


def _tmag(t: float) -> int | None:
    return time_magnitude(t) if 0 < t < math.inf else None


def validate_against_oracle(
    crn: CRN,
    partition: LevelPartition,
    caps,
    prune_level: int = 0,
    seeds: int = 0,
    state_limit: int = DEFAULT_STATE_LIMIT,
    report: AnalysisReport | None = None,
) -> list[Comparison]:
    """Reported magnitudes next to their counterparts on the bounded concrete chain.

    Covers mean times to reach each final bottom component, the steady state
    inside each final bottom component, and, with ``seeds > 0``, SSA
    frequencies of the branches taken from the initial state.
    """
    if report is None:
        actmc = build_abstraction(crn, partition)
        report = analyze(actmc, prune(actmc, prune_level))
    actmc = report.ctmc
    label = actmc.state_label
    bottoms = [c for c in report.components if c.kind == CONFIRMED]
    try:
        ctmc = build_bounded_ctmc(crn, caps, state_limit=state_limit)
    except StateSpaceOverflow as exc:
        return [Comparison("hitting-time", f"C{c.id}", None, None, "skipped", str(exc)) for c in bottoms]

    alpha = [abstract(x, partition) for x in ctmc.states]
    out: list[Comparison] = []
    for c in bottoms:
        members = set(c.states)
        subject = f"C{c.id} {{{', '.join(label(s) for s in c.states[:3])}{', ...' if len(c.states) > 3 else ''}}}"
        if actmc.initial in members:
            out.append(Comparison("hitting-time", subject, None, None, "skipped", "contains the initial state"))
            continue
        try:
            abs_t = abstract_hitting_time(actmc, c.states)
            orc_t = float(mean_hitting_time(ctmc, [i for i, a in enumerate(alpha) if a in members])[0])
        except IllConditionedError as exc:
            out.append(Comparison("hitting-time", subject, None, None, "skipped", str(exc)))
            continue
        if not (0 < abs_t < math.inf and 0 < orc_t < math.inf):
            out.append(Comparison("hitting-time", subject, _tmag(abs_t), _tmag(orc_t), "skipped", "not reached almost surely"))
            continue
        out.append(Comparison("hitting-time", subject, _tmag(abs_t), _tmag(orc_t), "ok"))

    bsccs = _concrete_bsccs(ctmc)
    for c in bottoms:
        if len(c.states) < 2:
            continue
        members = set(c.states)
        inside = [b for b in bsccs if all(alpha[i] in members for i in b)]
        if len(inside) != 1:
            out.append(Comparison("steady-state", f"C{c.id}", None, None, "skipped", f"{len(inside)} matching concrete bottom components"))
            continue
        pi = bscc_steady_state(ctmc, inside[0])
        mass: dict = {}
        for i, p in zip(inside[0], pi):
            mass[alpha[i]] = mass.get(alpha[i], 0.0) + float(p)
        for s in c.states:
            p = mass.get(s, 0.0)
            if p <= 0:
                out.append(Comparison("steady-state", f"C{c.id} {label(s)}", c.steady_magnitudes[s], None, "skipped", "no concrete mass"))
            else:
                out.append(Comparison("steady-state", f"C{c.id} {label(s)}", c.steady_magnitudes[s], magnitude(p), "ok"))

    if seeds > 0:
        first = [p for p in report.paths if p.iteration == 1 and report.components[p.target_component].kind == CONFIRMED]
        if len(first) >= 2:
            horizon = 0.0
            for p in first:
                try:
                    t = abstract_hitting_time(actmc, report.components[p.target_component].states)
                except IllConditionedError:
                    continue
                if t < math.inf:
                    horizon = max(horizon, t)
            horizon = 10 * horizon or 1.0
            for p in first:
                members = set(report.components[p.target_component].states)
                freq = ssa_frequency(crn, horizon, range(seeds), lambda x, m=members: abstract(x, partition) in m)
                om = magnitude(freq) if freq > 0 else None
                am = p.probability_magnitude
                status = "ok" if om is not None and am is not None else "skipped"
                out.append(Comparison("branch", f"C{p.target_component}", am, om, status, "" if status == "ok" else "zero frequency"))
    return out
