"""Population-level abstraction of a CRN into a small accelerated CTMC.

Each species' population is partitioned into intervals ("levels"). An abstract
state is a vector of level indices. Rates of an abstract state are evaluated at
a single representative concrete state (interval midpoints). A reaction whose
effect stays inside the current level is accelerated: it is replaced by one
transition summarising the ``n`` firings needed to leave the level, with
expected duration ``n / rate``.

Rates are kept as exact fractions, so orders of magnitude are computed without
floating-point rounding at powers of ten.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .crn import CRN, ConcreteState, Reaction, enabled, exact_propensity, propensity

Interval = tuple[int, "int | None"]
AbstractState = tuple[int, ...]


class PartitionError(ValueError):
    pass


# --- orders of magnitude ---------------------------------------------------


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def magnitude(rate) -> int:
    """Order of magnitude ``floor(log10(rate))``, exact for fractions and floats."""
    if isinstance(rate, float) and not math.isfinite(rate):
        raise ValueError(f"magnitude of non-finite value {rate}")
    q = _as_fraction(rate)
    if q <= 0:
        raise ValueError(f"magnitude needs a positive rate, got {rate}")
    e = math.floor(math.log10(q.numerator) - math.log10(q.denominator))
    while Fraction(10) ** e > q:
        e -= 1
    while Fraction(10) ** (e + 1) <= q:
        e += 1
    return e


def time_magnitude(time) -> int:
    """Order of magnitude of a duration, read off its rate: a wait at rate 0.05 is ``10^2``."""
    q = _as_fraction(time)
    if q <= 0:
        raise ValueError(f"time magnitude needs a positive duration, got {time}")
    return -magnitude(1 / q)


# --- partitions -------------------------------------------------------------


@dataclass(frozen=True)
class LevelPartition:
    """Per-species ordered interval partitions of the naturals plus top-level bounds."""

    species: tuple[str, ...]
    levels: tuple[tuple[Interval, ...], ...]
    bounds: tuple[int, ...]

    def level_of(self, species: int, n: int) -> int:
        for k, (lo, hi) in enumerate(self.levels[species]):
            if n >= lo and (hi is None or n <= hi):
                return k
        raise PartitionError(f"population {n} of {self.species[species]} is not covered")

    def interval(self, species: int, level: int) -> Interval:
        return self.levels[species][level]

    def upper(self, species: int, level: int) -> int:
        """Finite upper end of a level; the bound for the unbounded top level."""
        lo, hi = self.levels[species][level]
        return self.bounds[species] if hi is None else hi

    def is_top(self, species: int, level: int) -> bool:
        return self.levels[species][level][1] is None

    def interval_text(self, species: int, level: int) -> str:
        lo, hi = self.levels[species][level]
        if hi is None:
            return f"{lo}.."
        return str(lo) if lo == hi else f"{lo}..{hi}"

    def state_text(self, astate: AbstractState) -> str:
        return "[" + ", ".join(self.interval_text(i, k) for i, k in enumerate(astate)) + "]"


@dataclass(frozen=True)
class Violation:
    species: str
    kind: str
    detail: str

    def __str__(self):
        return f"{self.species}: {self.kind}: {self.detail}"


def validate_partition(crn: CRN, partition: LevelPartition) -> list[Violation]:
    """All violations of the partition invariants; an empty list means the partition is valid."""
    out: list[Violation] = []
    if tuple(partition.species) != crn.species_names:
        out.append(Violation("*", "species", "partition species differ from the model's"))
        return out
    for i, name in enumerate(partition.species):
        levels = partition.levels[i]
        if not levels:
            out.append(Violation(name, "coverage", "no levels"))
            continue
        expected = 0
        for k, (lo, hi) in enumerate(levels):
            if lo != expected:
                kind = "overlap" if lo < expected else "non-contiguous"
                out.append(Violation(name, kind, f"level {k} starts at {lo}, expected {expected}"))
            if hi is None:
                if k != len(levels) - 1:
                    out.append(Violation(name, "coverage", f"unbounded level {k} is not last"))
                break
            if hi < lo:
                out.append(Violation(name, "empty", f"level {k} is [{lo}..{hi}]"))
            expected = hi + 1
        if levels[-1][1] is not None:
            out.append(Violation(name, "coverage", f"last level ends at {levels[-1][1]}; must be unbounded"))
        singletons = {lo for lo, hi in levels if hi == lo}
        for v in range(crn.max_reactant_coefficient(i)):
            if v not in singletons:
                out.append(Violation(name, "singleton", f"{{{v}}} missing (needed for enabledness)"))
        top_lo = levels[-1][0]
        if partition.bounds[i] < top_lo:
            out.append(Violation(name, "bound", f"bound {partition.bounds[i]} below top level start {top_lo}"))
    return out


def check_partition(crn: CRN, partition: LevelPartition) -> None:
    violations = validate_partition(crn, partition)
    if violations:
        raise PartitionError("; ".join(map(str, violations)))


def default_levels(crn: CRN, species: int) -> tuple[Interval, ...]:
    """Singletons ``{0}..{r-1}`` for the largest reactant coefficient ``r`` (at least ``{0}``), then the rest."""
    r = max(1, crn.max_reactant_coefficient(species))
    return tuple((v, v) for v in range(r)) + ((r, None),)


def make_partition(
    crn: CRN,
    levels: dict[str, Sequence[Interval]] | None = None,
    bounds: dict[str, int] | None = None,
) -> LevelPartition:
    """Partition with per-species overrides; omitted species get :func:`default_levels`.

    An omitted bound defaults to ``max(top level start, initial population)``.
    """
    levels = levels or {}
    bounds = bounds or {}
    unknown = (set(levels) | set(bounds)) - set(crn.species_names)
    if unknown:
        raise PartitionError(f"unknown species in partition: {', '.join(sorted(unknown))}")
    all_levels = []
    all_bounds = []
    for s in crn.species:
        lv = tuple(levels[s.name]) if s.name in levels else default_levels(crn, s.index)
        all_levels.append(lv)
        default_bound = max(lv[-1][0], crn.initial_state[s.index])
        all_bounds.append(int(bounds.get(s.name, default_bound)))
    return LevelPartition(crn.species_names, tuple(all_levels), tuple(all_bounds))


def levels_from_thresholds(thresholds: Iterable[int], singletons: int = 1) -> tuple[Interval, ...]:
    """``{0}..{singletons-1}`` followed by intervals cut at each threshold."""
    cuts = sorted(set(thresholds))
    out: list[Interval] = [(v, v) for v in range(singletons)]
    lo = singletons
    for c in cuts:
        if c <= lo:
            continue
        out.append((lo, c - 1))
        lo = c
    out.append((lo, None))
    return tuple(out)


def abstract(state: Sequence[int], partition: LevelPartition) -> AbstractState:
    return tuple(partition.level_of(i, n) for i, n in enumerate(state))


def concretise(astate: AbstractState, partition: LevelPartition) -> ConcreteState:
    """Representative concrete state: floor midpoint of each level (top level capped by the bound)."""
    out = []
    for i, k in enumerate(astate):
        lo, _ = partition.levels[i][k]
        out.append((lo + partition.upper(i, k)) // 2)
    return tuple(out)


def interval_rate_bounds(
    crn: CRN, astate: AbstractState, reaction: Reaction, partition: LevelPartition
) -> tuple[float, float]:
    """Range of the reaction's propensity over the abstract state, from its corner populations."""
    low = []
    high = []
    for i, k in enumerate(astate):
        lo, _ = partition.levels[i][k]
        low.append(lo)
        high.append(partition.upper(i, k))
    return propensity(crn, reaction, low), propensity(crn, reaction, high)


# --- abstract CTMC ------------------------------------------------------------


@dataclass(frozen=True)
class AbstractTransition:
    source: Hashable
    target: Hashable
    reaction: str
    representative_rate: Fraction
    accelerated: bool = False
    steps: int = 1

    @property
    def rate(self) -> Fraction:
        """Effective rate: representative rate divided by the number of accelerated firings."""
        return self.representative_rate / self.steps

    @property
    def magnitude(self) -> int:
        return magnitude(self.rate)


@dataclass
class AbstractCTMC:
    """Abstract states, labelled transitions and the initial state.

    States may be any hashable values; their order in ``states`` fixes every
    tie-break downstream. ``partition`` and ``crn`` are set when the chain was
    built from a model.
    """

    states: list
    transitions: list[AbstractTransition]
    initial: Hashable
    partition: LevelPartition | None = None
    crn: CRN | None = None
    diagnostics: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.order = {s: i for i, s in enumerate(self.states)}
        self.outgoing: dict = {s: [] for s in self.states}
        for k, t in enumerate(self.transitions):
            if t.source == t.target:
                raise ValueError(f"self-loop on {t.source!r} via {t.reaction}")
            self.outgoing[t.source].append(k)

    @classmethod
    def from_edges(cls, states: Sequence, edges: Iterable[tuple], initial) -> "AbstractCTMC":
        """Build directly from ``(source, label, target, rate)`` tuples."""
        transitions = [
            AbstractTransition(s, t, label, rate if isinstance(rate, Fraction) else Fraction(str(rate)))
            for s, label, t, rate in edges
        ]
        return cls(list(states), transitions, initial)

    def state_label(self, s) -> str:
        if self.partition is not None and isinstance(s, tuple):
            return self.partition.state_text(s)
        return str(s)


def _acceleration_steps(c: ConcreteState, change: Sequence[int], astate: AbstractState, partition: LevelPartition):
    """Smallest ``n`` with ``alpha(c + n*change) != astate``; None if the level is never left."""
    best = None
    for i, d in enumerate(change):
        if d == 0:
            continue
        lo, hi = partition.levels[i][astate[i]]
        if d > 0:
            if hi is None:
                continue
            n = (hi - c[i]) // d + 1
        else:
            n = (c[i] - lo) // (-d) + 1
        best = n if best is None else min(best, n)
    return best


def build_abstraction(crn: CRN, partition: LevelPartition) -> AbstractCTMC:
    """Accelerated abstract CTMC restricted to states reachable from the abstract initial state."""
    check_partition(crn, partition)
    init = abstract(crn.initial_state, partition)
    seen = {init}
    queue = deque([init])
    transitions: list[AbstractTransition] = []
    diagnostics: list[str] = []
    while queue:
        a = queue.popleft()
        c = concretise(a, partition)
        for reaction in crn.reactions:
            if not enabled(reaction, c):
                continue
            r = exact_propensity(reaction, c)
            change = reaction.change
            succ = tuple(x + d for x, d in zip(c, change))
            target = abstract(succ, partition)
            steps = 1
            accelerated = target == a
            if accelerated:
                steps = _acceleration_steps(c, change, a, partition)
                if steps is None:
                    diagnostics.append(
                        f"reaction {reaction.label} never leaves {partition.state_text(a)}; dropped there"
                    )
                    continue
                moved = tuple(x + steps * d for x, d in zip(c, change))
                assert all(v >= 0 for v in moved), "acceleration drove a population negative"
                target = abstract(moved, partition)
            transitions.append(AbstractTransition(a, target, reaction.label, r, accelerated, steps))
            if target not in seen:
                seen.add(target)
                queue.append(target)
    reaction_order = {r.label: i for i, r in enumerate(crn.reactions)}
    states = sorted(seen)
    order = {s: i for i, s in enumerate(states)}
    transitions.sort(key=lambda t: (order[t.source], reaction_order[t.reaction], order[t.target]))
    return AbstractCTMC(states, transitions, init, partition, crn, diagnostics)


# --- refinement hints ---------------------------------------------------------


@dataclass(frozen=True)
class RateSpan:
    state: AbstractState
    reaction: str
    low: float
    high: float
    span: int


@dataclass
class RefinementReport:
    spans: list[RateSpan]
    top_reachable: list[tuple[str, AbstractState]]

    @property
    def empty(self) -> bool:
        return not self.spans and not self.top_reachable

    def messages(self, partition: LevelPartition) -> list[str]:
        out = [
            f"rate of {s.reaction} in {partition.state_text(s.state)} spans {s.span} orders "
            f"[{s.low:.3g}, {s.high:.3g}]; consider refining"
            for s in self.spans
        ]
        seen = set()
        for name, _ in self.top_reachable:
            if name not in seen:
                seen.add(name)
                out.append(f"top level of {name} is reachable; bound may be too low")
        return out


def suggest_refinement(crn: CRN, actmc: AbstractCTMC, span_threshold: int = 1) -> RefinementReport:
    if span_threshold < 1:
        raise ValueError("span threshold must be >= 1")
    partition = actmc.partition
    spans = []
    for a in actmc.states:
        c = concretise(a, partition)
        for reaction in crn.reactions:
            if not enabled(reaction, c):
                continue
            lo, hi = interval_rate_bounds(crn, a, reaction, partition)
            if lo <= 0:
                continue
            span = magnitude(hi) - magnitude(lo)
            if span > span_threshold:
                spans.append(RateSpan(a, reaction.label, lo, hi, span))
    top = []
    for a in actmc.states:
        for i, k in enumerate(a):
            if partition.is_top(i, k) and partition.bounds[i] > partition.levels[i][k][0]:
                top.append((partition.species[i], a))
    return RefinementReport(spans, top)
