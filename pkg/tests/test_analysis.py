from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from sqcrn import corpus
from sqcrn.abstraction import AbstractCTMC, build_abstraction, magnitude
from sqcrn.analysis import (
    BACK_TO_C,
    CANDIDATE,
    CONFIRMED,
    MERGE_RANGE,
    NEW_D,
    SEED,
    SUPERSEDED,
    TRANSIENT,
    analyze,
    component_steady_state,
    exit_distribution,
    scc_decompose,
    select_exit_states,
    slowest_rate,
    time_to_exit,
    transient_time,
)
from sqcrn.ctmc import ConcreteCTMC, bscc_steady_state
from sqcrn.pruning import prune

from strategies import abstract_ctmcs


def run(a, n=0):
    return analyze(a, prune(a, n))


# --- helpers -------------------------------------------------------------------


def test_scc_branching_solid_graph(branching):
    p = prune(branching, 0)
    edges = [(branching.transitions[k].source, branching.transitions[k].target) for k in p.kept]
    comps, _ = scc_decompose(branching.states, edges)
    assert sorted(map(sorted, comps)) == [["s0"], ["s1", "s2", "s3"], ["t"], ["u"]]


def test_scc_dag_and_cycle():
    comps, cond = scc_decompose("abc", [("a", "b"), ("b", "c")])
    assert comps == [["a"], ["b"], ["c"]] and sorted(cond) == [(0, 1), (1, 2)]
    comps, cond = scc_decompose("abc", [("a", "b"), ("b", "c"), ("c", "a")])
    assert comps == [["a", "b", "c"]] and cond == []


def test_steady_state_branching():
    w, m = component_steady_state({"s1": F(10), "s2": F(10), "s3": F(100)})
    assert w == {"s1": F(1, 2), "s2": F(1, 2), "s3": F(1, 20)}
    assert m == {"s1": -1, "s2": -1, "s3": -2}


def test_steady_state_uniform_cycle_and_singleton():
    w, _ = component_steady_state({i: F(7) for i in range(4)})
    assert set(w.values()) == {F(1, 4)}
    assert component_steady_state({"x": F(0)}) == ({"x": F(1)}, {"x": 0})
    with pytest.raises(ValueError):
        component_steady_state({"a": F(1), "b": F(0)})


def test_two_cycle_matches_oracle_ratio():
    w, m = component_steady_state({"a": F(1), "b": F(1000)})
    assert w["a"] / w["b"] == 1000
    pi = bscc_steady_state(ConcreteCTMC.from_rates([[0, 1], [1000, 0]]), [0, 1])
    total = sum(w.values())
    for s, p in zip("ab", pi):
        assert magnitude(w[s] / total) == magnitude(F(p))


def test_select_exit_states():
    staying = {"s1": F(10), "s2": F(10), "s3": F(100)}
    assert select_exit_states(staying, {"s2": F(1), "s3": F(10)}) == ["s2", "s3"]
    assert select_exit_states(staying, {"s2": F(1)}) == ["s2"]
    assert select_exit_states({"a": F(10), "b": F(1000)}, {"a": F(1), "b": F(1)}) == ["a"]
    assert select_exit_states(staying, {}) == []


def test_time_to_exit_branching():
    staying = {"s1": F(10), "s2": F(10), "s3": F(100)}
    exiting = {"s2": F(1), "s3": F(10)}
    assert time_to_exit(staying, exiting, ["s2", "s3"], "s2") == 1
    assert time_to_exit(staying, exiting, ["s2", "s3"], "s3") == 1
    assert time_to_exit({"x": F(4)}, {"x": F(2)}, ["x"], "x") == F(1, 2)


def test_exit_distribution():
    w = {"s1": F(1, 2), "s2": F(1, 2), "s3": F(1, 20)}
    assert exit_distribution(w, {"s2": F(1), "s3": F(10)}) == {"s2": F(1, 2), "s3": F(1, 2)}
    assert exit_distribution(w, {"s2": F(1)}) == {"s2": 1}
    d = exit_distribution({"a": F(1), "b": F(1)}, {"a": F(1), "b": F(100)})
    assert d == {"a": F(1, 101), "b": F(100, 101)}  # ~1% vs ~99%


def test_transient_time_and_slowest():
    assert transient_time([F(1), F(10), F(100)]) == 1
    assert transient_time([F(5), F(5)]) == F(2, 5)
    assert transient_time([]) == 0
    assert slowest_rate([F(3), F(1), F(1)]) == (F(1), 2)


# --- the worklist ----------------------------------------------------------------


def test_branching_n0(branching):
    r = run(branching, 0)
    cyc = next(c for c in r.components if c.states == ("s1", "s2", "s3"))
    assert cyc.iteration == 1
    assert cyc.steady_state == {"s1": F(1, 2), "s2": F(1, 2), "s3": F(1, 20)}
    assert cyc.exit_states == ("s2", "s3")
    assert cyc.exit_times == {"s2": 1, "s3": 1}
    assert sorted(cyc.exit_shares.values()) == [F(1, 2), F(1, 2)]
    t = next(c for c in r.components if c.states == ("t",))
    assert t.kind == CONFIRMED and t.iteration == 1
    # s2 -> s0 returns to the seed: the range merge makes {s0..s3} transient
    assert [(e.state, branching.transitions[e.transition].target) for e in r.exits] == [("s2", "s0")]
    merged = next(c for c in r.components if c.origin == "merge-range")
    assert merged.states == ("s0", "s1", "s2", "s3") and merged.kind == TRANSIENT
    assert [m.kind for m in r.merges if m.iteration == 2] == [MERGE_RANGE]
    # the u-exit is never analysed
    assert "u" not in r.states_mentioned()
    assert all(branching.transitions[e.transition].target != "u" for e in r.exits)
    assert [c.states for c in r.bottom_components] == [("t",)]


def test_branching_n1(branching):
    r = run(branching, 1)
    assert [c.states for c in r.bottom_components] == [("t",), ("u",)]
    assert "u" in r.states_mentioned()
    probs = {r.components[p.target_component].states: p.probability for p in r.paths}
    assert probs[("t",)] + probs[("u",)] == pytest.approx(1.0)


def test_absorbing_single_state():
    a = AbstractCTMC.from_edges(["x"], [], "x")
    r = run(a)
    assert [c.kind for c in r.components] == [SEED, CONFIRMED]
    (bottom,) = r.bottom_components
    assert bottom.states == ("x",) and bottom.steady_state == {"x": 1}
    assert r.exits == []


def test_two_component_chain():
    a = AbstractCTMC.from_edges(["A", "B"], [("A", "go", "B", F(1, 20))], "A")
    r = run(a)
    (p,) = r.paths
    assert p.states == ("A", "B") and p.time == 20 and p.time_magnitude == 2
    assert p.probability == 1.0
    assert [c.states for c in r.bottom_components] == [("B",)]
    assert [m.kind for m in r.merges] == [NEW_D]


def test_back_to_c_extends_component():
    # fast cycle a<->b, slow exit b->c, c returns fast to a
    edges = [("a", "x", "b", 10), ("b", "y", "a", 10), ("b", "z", "c", 1), ("c", "w", "a", 10)]
    a = AbstractCTMC.from_edges(["a", "b", "c"], edges, "a")
    r = run(a)
    kinds = [m.kind for m in r.merges]
    assert BACK_TO_C in kinds
    final = r.bottom_components
    assert [c.states for c in final] == [("a", "b", "c")]
    assert sum(final[0].steady_state.values()) == 1


def test_exit_into_known_bottom():
    # the exit from {a,b} lands in {t}, already found from the seed
    edges = [("s", "i", "a", 1), ("s", "j", "t", 1), ("a", "x", "b", 10), ("b", "y", "a", 10), ("b", "z", "t", 1)]
    a = AbstractCTMC.from_edges(["s", "a", "b", "t"], edges, "s")
    r = run(a)
    assert "reaches-known" in [m.kind for m in r.merges]


def test_mismatched_pruned_graph_rejected(branching):
    other = corpus.branching_ctmc()
    with pytest.raises(ValueError):
        analyze(branching, prune(other, 0))


def test_gene_slow_oscillation():
    crn = corpus.model("gene_slow")
    a = build_abstraction(crn, corpus.config("gene_refined").partition(crn))
    r = run(a)
    d_on = next(c for c in r.components if c.iteration == 1)
    assert all(s[3] == 1 and s[2] == 0 for s in d_on.states)
    assert all(s[0] or s[1] for s in d_on.states)
    deact = [e for e in r.exits if a.transitions[e.transition].reaction == "r2"]
    assert deact and deact[0].time_magnitude == 2
    act = [p for p in r.paths if p.iteration == 1 and p.target_component == d_on.id]
    assert act[0].time_magnitude == 2
    assert (0, 0, 1, 0) in act[0].states


# --- properties ------------------------------------------------------------------


def _scaled(a: AbstractCTMC, k: int) -> AbstractCTMC:
    edges = [(t.source, t.reaction, t.target, t.rate * F(10) ** k) for t in a.transitions]
    return AbstractCTMC.from_edges(a.states, edges, a.initial)


def _shape(r):
    return (
        [(c.states, c.kind, c.origin, c.parents, c.steady_magnitudes, c.exit_states) for c in r.components],
        [(e.state, e.transition, e.share) for e in r.exits],
        [(p.states, p.target_component, p.probability_magnitude) for p in r.paths],
        [(m.kind, m.source, m.reached, m.result) for m in r.merges],
    )


@settings(max_examples=60, deadline=None)
@given(abstract_ctmcs(), st.sampled_from([-3, 3]), st.integers(0, 2))
def test_scale_invariance(a, k, n):
    r, s = run(a, n), run(_scaled(a, k), n)
    assert _shape(r) == _shape(s)
    for c, d in zip(r.components, s.components):
        if c.time_to_exit is not None:
            assert d.exit_time_magnitude == c.exit_time_magnitude - k
    for p, q in zip(r.paths, s.paths):
        if p.time_magnitude is not None:
            assert q.time_magnitude == p.time_magnitude - k


@settings(max_examples=100, deadline=None)
@given(abstract_ctmcs(), st.integers(0, 2))
def test_report_soundness(a, n):
    pruned = prune(a, n)
    r = analyze(a, pruned)
    # every path follows kept transitions and ends in its target
    for p in r.paths:
        assert p.states[0] == p.start
        for u, k, v in zip(p.states, p.transitions, p.states[1:]):
            t = a.transitions[k]
            assert (t.source, t.target) == (u, v) and k in pruned.kept
        if p.transitions:
            assert p.states[-1] in r.components[p.target_component].states
        assert 0.0 <= p.probability <= 1.0 + 1e-9
    # confirmed bottoms have no kept transition leaving them
    for c in r.bottom_components:
        members = set(c.states)
        assert all(a.transitions[k].target in members for s in c.states for k in pruned.kept_out(s))
    # everything mentioned is reachable from the initial state
    reach, stack = {a.initial}, [a.initial]
    while stack:
        for v in pruned.successors(stack.pop()):
            if v not in reach:
                reach.add(v)
                stack.append(v)
    exit_targets = {a.transitions[e.transition].target for e in r.exits}
    full, stack = {a.initial}, [a.initial]
    while stack:
        for k in a.outgoing[stack.pop()]:
            v = a.transitions[k].target
            if v not in full:
                full.add(v)
                stack.append(v)
    assert r.states_mentioned() <= full
    assert exit_targets <= full
    # normalised steady states and shares
    for c in r.components:
        if c.exit_shares:
            assert sum(c.exit_shares.values()) == 1
    assert r.processing_order[0] == 0


@settings(max_examples=50, deadline=None)
@given(abstract_ctmcs())
def test_deterministic(a):
    assert _shape(run(a)) == _shape(run(a))


def test_range_merge_weights_scale_free():
    # a merge-range that also absorbs back-to-C states; weights once mixed units
    edges = """s0 s4 100; s8 s6 3/100; s4 s1 7/1000; s7 s6 1000; s1 s8 40; s6 s5 6; s3 s6 3/10;
    s6 s0 2/5; s2 s5 3/1000; s3 s6 10; s8 s5 600; s3 s5 7/1000; s3 s7 30; s5 s1 800; s6 s4 2000;
    s7 s2 1/2000; s8 s5 7/10; s5 s7 6000; s8 s0 3/10; s1 s3 50; s3 s2 80; s5 s0 300; s8 s5 600;
    s4 s8 1/125; s0 s1 9; s4 s3 7/10; s3 s4 200"""
    triples = [e.split() for e in edges.split(";")]
    a = AbstractCTMC.from_edges(
        [f"s{i}" for i in range(9)], [(u, f"r{i}", v, F(q)) for i, (u, v, q) in enumerate(triples)], "s0"
    )
    r = run(a, 0)
    for k in (-3, 3):
        s = run(_scaled(a, k), 0)
        assert [c.steady_state for c in r.components] == [c.steady_state for c in s.components]
