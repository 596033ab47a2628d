"""Order-of-magnitude analysis of a pruned abstract CTMC.

The analysis alternates between steady-state and transient reasoning. A
worklist holds components of the pruned graph. For each component we
approximate its steady state from the staying rates, pick the most probable
exits (the states minimising staying/exiting rate), estimate the time to
take them, and follow each exit target along kept edges to the components it
reaches. Reaching the current component again, or an earlier one, merges
components; reaching an unseen bottom component queues it.

All decisions compare integer orders of magnitude; the underlying values
are exact fractions so small worked examples reproduce exactly.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .abstraction import AbstractCTMC, magnitude, time_magnitude
from .pruning import PrunedGraph

SEED = "seed"
CANDIDATE = "candidate-bottom"
CONFIRMED = "confirmed-bottom"
TRANSIENT = "transient-merged"
SUPERSEDED = "superseded"

BACK_TO_C = "back-to-C"
MERGE_RANGE = "merge-range"
NEW_D = "new-D"
REACHES_KNOWN = "reaches-known"
REQUEUE = "requeue"


# --- formulas ----------------------------------------------------------------


def scc_decompose(nodes: Sequence[Hashable], edges: Iterable[tuple]) -> tuple[list[list], list[tuple[int, int]]]:
    """Strongly connected components and the condensation's edges.

    Components are ordered by their first member in ``nodes`` order; members keep that order.
    Condensation edges are pairs of component positions.
    """
    order = {v: i for i, v in enumerate(nodes)}
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from((u, v) for u, v, *_ in edges)
    comps = [sorted(c, key=order.__getitem__) for c in nx.strongly_connected_components(g)]
    comps.sort(key=lambda c: order[c[0]])
    where = {v: i for i, c in enumerate(comps) for v in c}
    cond = sorted({(where[u], where[v]) for u, v in g.edges if where[u] != where[v]})
    return comps, cond


def slowest_rate(rates: Iterable[Fraction]) -> tuple[Fraction, int]:
    """Minimum of ``rates`` and how many times it occurs."""
    rates = list(rates)
    low = min(rates)
    return low, sum(1 for r in rates if r == low)


def component_steady_state(staying: Mapping[Hashable, Fraction], internal: Iterable[Fraction] | None = None) -> tuple[dict, dict]:
    """Weights ``minStayingRate / (m * stayingRate(s))`` and magnitudes of the normalised weights.

    ``minStayingRate`` is the slowest rate inside the component and ``m`` its
    number of occurrences. ``internal`` lists the rates of the component's
    internal transitions; without it the staying rates stand in for them,
    which is the same thing on a simple cycle.
    """
    if len(staying) == 1:
        (s,) = staying
        return {s: Fraction(1)}, {s: 0}
    if any(r <= 0 for r in staying.values()):
        raise ValueError("every state of a non-trivial component needs a positive staying rate")
    low, m = slowest_rate(staying.values() if internal is None else internal)
    weights = {s: low / (m * r) for s, r in staying.items()}
    return weights, weight_magnitudes(weights)


def weight_magnitudes(weights: Mapping[Hashable, Fraction]) -> dict:
    total = sum(weights.values())
    return {s: magnitude(w / total) for s, w in weights.items()}


def select_exit_states(staying: Mapping, exiting: Mapping) -> list:
    """States minimising ``staying / exiting`` at magnitude resolution, in mapping order.

    The ratio's order is the difference of the two rate magnitudes.

    ``exiting`` holds only states that have an exit. Empty result means no exits.
    """
    ratios = {s: magnitude(staying[s]) - magnitude(e) for s, e in exiting.items()}
    if not ratios:
        return []
    best = min(ratios.values())
    return [s for s in exiting if ratios[s] == best]


def time_to_exit(staying: Mapping, exiting: Mapping, exit_states: Sequence, s, internal: Iterable[Fraction] | None = None) -> Fraction:
    """``stayingRate(s) * m / (|exitStates| * minStayingRate * exitingRate(s))``.

    ``minStayingRate`` and ``m`` as in :func:`component_steady_state`.
    """
    low, m = slowest_rate(staying.values() if internal is None else internal)
    return staying[s] * m / (len(exit_states) * low * exiting[s])


def exit_distribution(weights: Mapping, exit_rates: Mapping, state_of=None) -> dict:
    """Probability share of each exit: steady-state weight times exit rate, normalised.

    Keys of ``exit_rates`` are exit states, or arbitrary exit keys when
    ``state_of`` maps each key to its state.
    """
    raw = {key: weights[key if state_of is None else state_of(key)] * rate for key, rate in exit_rates.items()}
    total = sum(raw.values())
    return {k: v / total for k, v in raw.items()}


def transient_time(rates: Sequence[Fraction]) -> Fraction:
    """``m / minRate`` over the rates of a path, ``m`` the number of slowest edges; 0 for no edges."""
    if not rates:
        return Fraction(0)
    low = min(rates)
    return sum(1 for r in rates if r == low) / Fraction(low)


# --- report records -------------------------------------------------------------


@dataclass
class Component:
    id: int
    states: tuple
    iteration: int
    kind: str
    origin: str
    parents: tuple[int, ...] = ()
    steady_state: dict = field(default_factory=dict)
    steady_magnitudes: dict = field(default_factory=dict)
    carried: dict | None = None
    absorbed: frozenset[int] = frozenset()
    time_to_exit: Fraction | None = None
    leaving: tuple[int, ...] = ()
    exit_states: tuple = ()
    exit_times: dict = field(default_factory=dict)
    exit_shares: dict = field(default_factory=dict)

    @property
    def exit_time_magnitude(self) -> int | None:
        return None if self.time_to_exit is None else time_magnitude(self.time_to_exit)


@dataclass
class ExitRecord:
    component: int
    iteration: int
    state: Hashable
    transition: int
    staying_rate: Fraction
    exiting_rate: Fraction
    rate: Fraction
    time_to_exit: Fraction
    share: Fraction

    @property
    def time_magnitude(self) -> int:
        return time_magnitude(self.time_to_exit)

    @property
    def share_magnitude(self) -> int:
        return magnitude(self.share)


@dataclass
class TransientPath:
    source_component: int
    iteration: int
    start: Hashable
    target_component: int
    states: tuple
    transitions: tuple[int, ...]
    min_rate: Fraction | None
    count: int
    time: Fraction
    probability: float
    via_exit: int | None = None

    @property
    def time_magnitude(self) -> int | None:
        return time_magnitude(self.time) if self.time > 0 else None

    @property
    def probability_magnitude(self) -> int | None:
        return magnitude(self.probability) if self.probability > 0 else None


@dataclass
class MergeEvent:
    kind: str
    iteration: int
    source: int
    reached: int | None
    result: int | None
    added_states: tuple = ()


@dataclass
class AnalysisReport:
    ctmc: AbstractCTMC
    pruned: PrunedGraph
    components: list[Component]
    exits: list[ExitRecord]
    paths: list[TransientPath]
    merges: list[MergeEvent]
    processing_order: list[int]
    edge_iteration: dict[int, int]

    def component(self, cid: int) -> Component:
        return self.components[cid]

    @property
    def bottom_components(self) -> list[Component]:
        return [c for c in self.components if c.kind == CONFIRMED]

    @property
    def iterations(self) -> list[int]:
        return sorted({c.iteration for c in self.components})

    def at_iteration(self, k: int) -> dict:
        return {
            "components": [c for c in self.components if c.iteration == k],
            "exits": [e for e in self.exits if e.iteration == k],
            "paths": [p for p in self.paths if p.iteration == k],
            "merges": [m for m in self.merges if m.iteration == k],
        }

    def states_mentioned(self) -> set:
        out = set()
        for c in self.components:
            out.update(c.states)
        for p in self.paths:
            out.update(p.states)
        return out


# --- the worklist algorithm ------------------------------------------------------


class _Analysis:
    def __init__(self, actmc: AbstractCTMC, pruned: PrunedGraph):
        if actmc.initial not in actmc.order:
            raise ValueError("initial state is not a state of the abstract CTMC")
        self.a = actmc
        self.g = pruned
        self.tr = actmc.transitions
        self.order = actmc.order
        self.owner: dict = {}
        self.comps: list[Component] = []
        self.children: dict[int, set[int]] = {}
        self.edge_states: dict[tuple[int, int], tuple] = {}
        self.edge_iter: dict[int, int] = {}
        self.exits: list[ExitRecord] = []
        self.paths: list[TransientPath] = []
        self.merges: list[MergeEvent] = []
        self.work: deque[int] = deque()
        self.processed: list[int] = []
        self.staying = {s: sum((self.tr[k].rate for k in pruned.kept_out(s)), Fraction(0)) for s in actmc.states}

    # bookkeeping

    def _sorted(self, states: Iterable) -> tuple:
        return tuple(sorted(set(states), key=self.order.__getitem__))

    def _new_component(self, states, iteration, kind, origin, parents=()) -> Component:
        c = Component(len(self.comps), self._sorted(states), iteration, kind, origin, tuple(parents))
        self.comps.append(c)
        self.children[c.id] = set()
        for p in parents:
            self.children[p].add(c.id)
        for s in c.states:
            self.owner[s] = c.id
        return c

    def _ancestors(self, cid: int) -> set[int]:
        out = set()
        stack = [cid]
        while stack:
            x = stack.pop()
            for p in self.comps[x].parents:
                if p not in out:
                    out.add(p)
                    stack.append(p)
        return out

    def _descendants(self, cid: int) -> set[int]:
        out = set()
        stack = [cid]
        while stack:
            x = stack.pop()
            for ch in self.children[x]:
                if ch not in out:
                    out.add(ch)
                    stack.append(ch)
        return out

    # exploration along kept edges

    def _explore(self, start, iteration: int, passable: frozenset = frozenset()):
        """Follow kept edges from ``start``; owned states (except ``passable``) are sinks.

        Returns ``(targets, region, new_ids)`` where targets maps component id to
        the region states that can reach it.
        """
        def is_sink(s):
            return s in self.owner and s not in passable

        if is_sink(start):
            return {self.owner[start]: set()}, [], []
        region = [start]
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for k in self.g.kept_out(u):
                self.edge_iter.setdefault(k, iteration)
                v = self.tr[k].target
                if v not in seen and not is_sink(v):
                    seen.add(v)
                    region.append(v)
                    queue.append(v)
        region = list(self._sorted(region))
        inside = set(region)
        edges = [(u, self.tr[k].target) for u in region for k in self.g.kept_out(u) if self.tr[k].target in inside]
        comps, _ = scc_decompose(region, edges)
        new_ids = []
        for members in comps:
            mset = set(members)
            leaves = any(self.tr[k].target not in mset for u in members for k in self.g.kept_out(u))
            if not leaves:
                c = self._new_component(members, iteration, CANDIDATE, "bscc")
                new_ids.append(c.id)
        # which terminal components each region state can reach
        reach: dict = {u: set() for u in region}
        preds: dict = {u: [] for u in region}
        frontier = deque()
        for u in region:
            if self.owner.get(u) in new_ids:
                reach[u].add(self.owner[u])
                frontier.append(u)
            for k in self.g.kept_out(u):
                v = self.tr[k].target
                if v in inside:
                    preds[v].append(u)
                elif self.owner[v] not in reach[u]:
                    reach[u].add(self.owner[v])
                    frontier.append(u)
        while frontier:
            v = frontier.popleft()
            for u in preds[v]:
                if not reach[v] <= reach[u]:
                    reach[u] |= reach[v]
                    frontier.append(u)
        targets: dict[int, set] = {}
        for u in region:
            for cid in reach[u]:
                targets.setdefault(cid, set()).add(u)
        return targets, region, new_ids

    def _widest_path(self, start, goal: set, passable: frozenset):
        """Path from ``start`` into ``goal`` maximising the slowest rate, then fewest hops."""
        if start in goal:
            return [start], []
        best = {start: (Fraction(-1), 0)}
        heap = [(0, 0, self.order[start], start)]
        back: dict = {}
        done = set()
        found = None
        while heap:
            _, _, _, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u in goal:
                found = u
                break
            if u in self.owner and u not in passable and u != start:
                continue
            bott_u, hops_u = best[u]
            for k in self.g.kept_out(u):
                v = self.tr[k].target
                r = self.tr[k].rate
                b = r if bott_u < 0 else min(bott_u, r)
                cand = (b, hops_u + 1)
                old = best.get(v)
                if old is None or (cand[0] > old[0]) or (cand[0] == old[0] and cand[1] < old[1]):
                    best[v] = cand
                    back[v] = (u, k)
                    heapq.heappush(heap, (-b, cand[1], self.order[v], v))
        if found is None:
            return None
        states, edges = [found], []
        while states[-1] != start:
            u, k = back[states[-1]]
            edges.append(k)
            states.append(u)
        return states[::-1], edges[::-1]

    def _absorption(self, start, region: list, targets: dict[int, set], new_ids: list[int]) -> dict[int, float]:
        """Probability of ending in each target component from ``start`` along kept edges."""
        if not region:
            return {cid: 1.0 for cid in targets}
        ids = sorted(targets)
        col = {cid: j for j, cid in enumerate(ids)}
        absorbing = {u: self.owner[u] for u in region if self.owner.get(u) in new_ids}
        if start in absorbing:
            return {cid: float(cid == absorbing[start]) for cid in ids}
        trans = [u for u in region if u not in absorbing]
        pos = {u: i for i, u in enumerate(trans)}
        n = len(trans)
        P = np.zeros((n, n))
        B = np.zeros((n, len(ids)))
        for u in trans:
            stay = self.staying[u]
            for k in self.g.kept_out(u):
                v = self.tr[k].target
                p = float(self.tr[k].rate / stay)
                if v in pos:
                    P[pos[u], pos[v]] += p
                elif v in absorbing:
                    B[pos[u], col[absorbing[v]]] += p
                else:
                    B[pos[u], col[self.owner[v]]] += p
        X = np.linalg.solve(np.eye(n) - P, B)
        row = X[pos[start]]
        return {cid: float(row[col[cid]]) for cid in ids}

    def _record_path(self, source: Component, start, cid: int, iteration: int, passable, prob, via) -> TransientPath:
        goal = set(self.comps[cid].states)
        found = self._widest_path(start, goal, passable)
        if found is None:
            states, edges = (start,), ()
        else:
            states, edges = found
        rates = [self.tr[k].rate for k in edges]
        low = min(rates) if rates else None
        path = TransientPath(
            source.id,
            iteration,
            start,
            cid,
            tuple(states),
            tuple(edges),
            low,
            sum(1 for r in rates if r == low) if rates else 0,
            transient_time(rates),
            prob,
            via,
        )
        self.paths.append(path)
        return path

    # main loop

    def run(self) -> AnalysisReport:
        seed = self._new_component([self.a.initial], 0, SEED, "seed")
        seed.steady_state = {self.a.initial: Fraction(1)}
        seed.steady_magnitudes = {self.a.initial: 0}
        self.work.append(seed.id)
        while self.work:
            cid = self.work.popleft()
            self.processed.append(cid)
            c = self.comps[cid]
            if any(self.owner[s] != cid for s in c.states) and c.kind != SEED:
                # absorbed into a later merge before being analysed
                c.kind = SUPERSEDED
                continue
            if c.kind == SEED:
                self._process_seed(c)
            else:
                self._process(c)
        return AnalysisReport(
            self.a,
            self.g,
            self.comps,
            self.exits,
            self.paths,
            self.merges,
            self.processed,
            dict(self.edge_iter),
        )

    def _process_seed(self, seed: Component):
        start = self.a.initial
        passable = frozenset(seed.states)
        targets, region, new_ids = self._explore(start, 1, passable)
        probs = self._absorption(start, region, targets, new_ids)
        for cid in sorted(targets):
            self._record_path(seed, start, cid, 1, passable, probs.get(cid, 0.0), None)
            if cid in new_ids:
                self.comps[cid].parents = (seed.id,)
                self.children[seed.id].add(cid)
                self._remember_route(seed.id, cid, self.paths[-1], targets)
                self.merges.append(MergeEvent(NEW_D, 1, seed.id, cid, cid))
                self.work.append(cid)

    def _steady_state(self, c: Component):
        if c.carried is not None:
            c.steady_state = dict(c.carried)
            c.steady_magnitudes = weight_magnitudes(c.carried)
        else:
            c.steady_state, c.steady_magnitudes = component_steady_state(
                {s: self.staying[s] for s in c.states}, self._internal_rates(c)
            )

    def _internal_rates(self, c: Component) -> list[Fraction] | None:
        members = set(c.states)
        rates = [self.tr[k].rate for s in c.states for k in self.g.kept_out(s) if self.tr[k].target in members]
        return rates or None

    def _process(self, c: Component):
        self._steady_state(c)
        members = set(c.states)
        leaving = tuple(k for s in c.states for k in self.g.kept_out(s) if self.tr[k].target not in members)
        if leaving:
            c.kind = TRANSIENT
            c.leaving = leaving
            return
        staying = {s: self.staying[s] for s in c.states}
        exiting = {}
        exit_edges = {}
        for s in c.states:
            cands = [k for k in self.g.pruned_out(s) if k not in c.absorbed and self.tr[k].target not in members]
            if not cands:
                continue
            exiting[s] = max(self.tr[k].rate for k in cands)
            # every leaving transition of the top magnitude is a candidate exit
            top = magnitude(exiting[s])
            exit_edges[s] = [k for k in cands if self.tr[k].magnitude == top]
        exit_states = select_exit_states(staying, exiting)
        if not exit_states:
            c.kind = CONFIRMED
            return
        it = c.iteration + 1
        weights = c.steady_state
        pairs = [(s, k) for s in exit_states for k in exit_edges[s]]
        shares = exit_distribution(weights, {(s, k): self.tr[k].rate for s, k in pairs}, state_of=lambda key: key[0])
        internal = self._internal_rates(c)
        times = {s: time_to_exit(staying, exiting, exit_states, s, internal) for s in exit_states}
        c.time_to_exit = times[exit_states[0]]
        c.exit_states = tuple(exit_states)
        c.exit_times = times
        c.exit_shares = shares
        norm_total = sum(weights.values())
        merged_states: set = set()
        merged_weights: dict = {}
        range_comps: set[int] = set()
        progress = False
        new_children = []
        for s, k in pairs:
            if range_comps:
                # C now sits inside a larger, transient merge; its remaining exits are moot
                break
            self.edge_iter.setdefault(k, it)
            self.exits.append(ExitRecord(c.id, it, s, k, staying[s], exiting[s], self.tr[k].rate, times[s], shares[(s, k)]))
            t = self.tr[k].target
            targets, region, new_ids = self._explore(t, it)
            probs = self._absorption(t, region, targets, new_ids)
            for did in sorted(targets):
                path = self._record_path(c, t, did, it, frozenset(), probs.get(did, 0.0), k)
                basin = self._basin(did, targets)
                if did == c.id:
                    tau = basin - members
                    if tau:
                        progress = True
                        # merge weights are dwell-weighted, i.e. carry time units
                        base = weights[s] / norm_total * c.time_to_exit
                        factor = staying[s] / self.tr[k].rate
                        for u in tau:
                            merged_weights[u] = base / factor
                        merged_states |= tau
                    self.merges.append(MergeEvent(BACK_TO_C, it, c.id, did, None, self._sorted(tau)))
                elif did in self._ancestors(c.id):
                    progress = True
                    span = (self._descendants(did) | {did}) & (self._ancestors(c.id) | {c.id})
                    range_comps |= span
                    merged_states |= basin
                    for u in basin:
                        merged_weights.setdefault(u, 1 / self.staying[u] if self.staying[u] else c.time_to_exit)
                    self.merges.append(MergeEvent(MERGE_RANGE, it, c.id, did, None, self._sorted(basin)))
                elif did in new_ids:
                    progress = True
                    d = self.comps[did]
                    d.parents = (c.id,)
                    self.children[c.id].add(did)
                    self._remember_route(c.id, did, path, targets)
                    new_children.append(did)
                    self.merges.append(MergeEvent(NEW_D, it, c.id, did, did))
                else:
                    progress = True
                    if did not in self._ancestors(c.id) and did != c.id and c.id not in self._ancestors(did):
                        self.comps[did].parents = tuple(sorted(set(self.comps[did].parents) | {c.id}))
                        self.children[c.id].add(did)
                    self.merges.append(MergeEvent(REACHES_KNOWN, it, c.id, did, None))
        self.work.extend(new_children)
        if merged_states or range_comps:
            self._merge(c, it, merged_states, merged_weights, range_comps)
        elif not progress:
            used = frozenset(k for _, k in pairs)
            again = self._new_component(c.states, it, CANDIDATE, "requeue", (c.id,))
            again.absorbed = c.absorbed | used
            again.carried = dict(c.steady_state) if c.carried is not None else None
            self.merges.append(MergeEvent(REQUEUE, it, c.id, c.id, again.id))
            self.work.append(again.id)

    def _basin(self, cid: int, targets: dict[int, set]) -> set:
        """Explored states from which ``cid`` is the only reachable target."""
        others = set().union(*(m for d, m in targets.items() if d != cid))
        return targets[cid] - others

    def _remember_route(self, parent: int, child: int, path: TransientPath, targets: dict[int, set]):
        """Record the transient states between two components of the discovery history."""
        inside = set(self.comps[child].states)
        route = (self._basin(child, targets) | set(path.states)) - inside
        self.edge_states[(parent, child)] = self._sorted(route)

    def _merge(self, c: Component, it: int, extra: set, extra_weights: dict, range_comps: set[int]):
        weights: dict = {}
        # every weight is a time, so normalisation is independent of the rate scale
        unit = c.time_to_exit
        if range_comps:
            # each constituent contributes its normalised steady state scaled by its dwell time
            for rid in sorted(range_comps | {c.id}):
                r = self.comps[rid]
                dwell = r.time_to_exit
                if dwell is None:
                    dwell = sum((1 / self.staying[s] for s in r.states if self.staying[s]), Fraction(0)) or unit
                w = r.steady_state or {s: Fraction(1) for s in r.states}
                total = sum(w.values())
                for s in r.states:
                    weights[s] = weights.get(s, Fraction(0)) + w.get(s, Fraction(0)) / total * dwell
            for (p, ch), states in self.edge_states.items():
                if p in range_comps and ch in range_comps | {c.id}:
                    for s in states:
                        if s not in weights and self.staying[s]:
                            weights[s] = 1 / self.staying[s]
        else:
            total = sum(c.steady_state.values())
            weights = {s: w / total * unit for s, w in c.steady_state.items()}
        for u in extra:
            if u not in weights:
                weights[u] = extra_weights.get(u, unit)
        total = sum(weights.values())
        weights = {s: w / total for s, w in weights.items()}
        parents = sorted(range_comps | {c.id})
        m = self._new_component(weights.keys(), it, CANDIDATE, "merge-range" if range_comps else "merge-back", parents)
        m.carried = {s: weights[s] for s in m.states}
        for ev in self.merges:
            if ev.source == c.id and ev.iteration == it and ev.result is None and (ev.kind == MERGE_RANGE or ev.added_states):
                ev.result = m.id
        self.work.append(m.id)


def analyze(actmc: AbstractCTMC, pruned: PrunedGraph) -> AnalysisReport:
    if pruned.ctmc is not actmc:
        raise ValueError("pruned graph was built from a different abstract CTMC")
    return _Analysis(actmc, pruned).run()
