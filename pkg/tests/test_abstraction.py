from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sqcrn import corpus
from sqcrn.abstraction import (
    AbstractCTMC,
    LevelPartition,
    PartitionError,
    abstract,
    build_abstraction,
    check_partition,
    concretise,
    default_levels,
    interval_rate_bounds,
    levels_from_thresholds,
    magnitude,
    make_partition,
    suggest_refinement,
    time_magnitude,
    validate_partition,
)
from sqcrn.config import parse_config
from sqcrn.crn import ParseError, parse_crn

FOUR = ((0, 0), (1, 5), (6, 20), (21, None))


def test_four_level_partition_is_valid(degradation):
    p = make_partition(degradation, {"X": FOUR}, {"X": 40})
    assert validate_partition(degradation, p) == []


def test_dimerisation_needs_singleton_one():
    crn = parse_crn("species M, D\nr dim: 2 M -> D @ 0.083\n")
    p = make_partition(crn, {"M": ((0, 0), (1, 5), (6, None))})
    kinds = [(v.species, v.kind) for v in validate_partition(crn, p)]
    assert ("M", "singleton") in kinds
    assert any("{1}" in v.detail for v in validate_partition(crn, p))


@pytest.mark.parametrize(
    "levels, kind",
    [
        (((0, 0), (2, 5), (6, None)), "non-contiguous"),
        (((0, 0), (0, 5), (6, None)), "overlap"),
        (((0, 0), (1, 5)), "coverage"),
        (((0, 0), (1, None), (5, None)), "coverage"),
        (((1, 5), (6, None)), "non-contiguous"),
    ],
)
def test_injected_violations(degradation, levels, kind):
    p = make_partition(degradation, {"X": levels}, {"X": 40})
    assert kind in {v.kind for v in validate_partition(degradation, p)}
    with pytest.raises(PartitionError):
        check_partition(degradation, p)


def test_bound_below_top_level(degradation):
    p = make_partition(degradation, {"X": FOUR}, {"X": 10})
    assert [v.kind for v in validate_partition(degradation, p)] == ["bound"]


def test_unknown_species_in_partition(degradation):
    with pytest.raises(PartitionError, match="Y"):
        make_partition(degradation, {"Y": FOUR})


def test_default_levels_and_bound():
    crn = parse_crn("species M, D\ninit M=7\nr dim: 2 M -> D @ 1\n")
    assert default_levels(crn, 0) == ((0, 0), (1, 1), (2, None))
    assert default_levels(crn, 1) == ((0, 0), (1, None))
    p = make_partition(crn)
    assert p.bounds == (7, 1)
    assert validate_partition(crn, p) == []


def test_levels_from_thresholds():
    assert levels_from_thresholds([100]) == ((0, 0), (1, 99), (100, None))
    assert levels_from_thresholds([10, 1000], singletons=2) == ((0, 0), (1, 1), (2, 9), (10, 999), (1000, None))


def test_abstract_and_concretise(degradation):
    p = make_partition(degradation, {"X": FOUR}, {"X": 100})
    assert abstract((0,), p) == (0,)
    assert abstract((13,), p) == (2,)
    assert concretise((2,), p) == (13,)
    assert concretise((0,), p) == (0,)
    assert concretise((3,), p) == (60,)


def test_coarse_gene_initial_state():
    crn = corpus.model("gene_slow")
    p = corpus.config("gene_coarse").partition(crn)
    assert abstract((10, 4, 1, 0), p) == (1, 1, 1, 0)


@pytest.mark.parametrize(
    "rate, m",
    [(10, 1), (Fraction(1, 20), -2), (Fraction(13, 10000), -3), (1, 0), (Fraction(1, 10), -1), (0.1, -1), (1000, 3)],
)
def test_magnitude(rate, m):
    assert magnitude(rate) == m


def test_time_magnitude():
    assert time_magnitude(Fraction(20)) == 2  # waiting at rate 0.05
    assert time_magnitude(Fraction(1)) == 0
    assert time_magnitude(Fraction(1, 10)) == -1
    with pytest.raises(ValueError):
        time_magnitude(0)
    with pytest.raises(ValueError):
        magnitude(-1)


@given(st.fractions(min_value=Fraction(1, 10**9), max_value=10**9))
def test_magnitude_brackets(q):
    m = magnitude(q)
    assert Fraction(10) ** m <= q < Fraction(10) ** (m + 1)


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10**6), st.integers(-3, 3))
def test_magnitude_shifts_with_scale(q, k):
    assert magnitude(q * Fraction(10) ** k) == magnitude(q) + k


def test_interval_rate_bounds(degradation):
    p = make_partition(degradation, {"X": FOUR}, {"X": 40})
    d = degradation.reactions[0]
    assert interval_rate_bounds(degradation, (2,), d, p) == pytest.approx((6e-4, 20e-4))
    assert interval_rate_bounds(degradation, (0,), d, p) == (0, 0)
    bi = parse_crn("species A, B\nr x: A + B -> 0 @ 1\n")
    q = make_partition(bi, {"A": ((0, 0), (1, 5), (6, None)), "B": ((0, 0), (1, 5), (6, None))})
    assert interval_rate_bounds(bi, (1, 1), bi.reactions[0], q) == (1, 25)


def test_degradation_abstraction_is_four_level_chain(degradation, degradation_partition):
    a = build_abstraction(degradation, degradation_partition)
    assert a.states == [(0,), (1,), (2,), (3,)]
    assert a.initial == (3,)
    edges = [(t.source, t.target) for t in a.transitions]
    assert edges == [((1,), (0,)), ((2,), (1,)), ((3,), (2,))]
    assert all(t.source != t.target for t in a.transitions)
    mid = next(t for t in a.transitions if t.source == (2,))
    assert mid.representative_rate == Fraction(13, 10000)
    assert mid.steps == 8 and mid.accelerated
    assert mid.rate == Fraction(13, 80000)
    # expected traversal 8 / (13e-4) ~ 0.6e4, same magnitude as 7/13 * 1e4
    assert time_magnitude(1 / mid.rate) == time_magnitude(Fraction(7, 13) * 10**4) == 4


def test_disabled_reaction_has_no_transition(degradation, degradation_partition):
    a = build_abstraction(degradation, degradation_partition)
    assert a.outgoing[(0,)] == []


def test_acceleration_never_leaving_level_is_dropped():
    crn = parse_crn("species X\ninit X=3\nr b: 0 -> X @ 1\n")
    p = make_partition(crn, {"X": ((0, 0), (1, None))}, {"X": 10})
    a = build_abstraction(crn, p)
    assert a.states == [(1,)]
    assert a.transitions == [] and a.diagnostics


def test_build_abstraction_rejects_bad_partition(degradation):
    with pytest.raises(PartitionError):
        build_abstraction(degradation, make_partition(degradation, {"X": ((0, 0), (2, None))}))


def test_from_edges_rejects_self_loop():
    with pytest.raises(ValueError, match="self-loop"):
        AbstractCTMC.from_edges(["a"], [("a", "x", "a", 1)], "a")


def test_refinement_spans():
    crn = parse_crn("species X\ninit X=30\nr d: X -> 0 @ 1e-4\n")
    p = make_partition(crn, {"X": ((0, 0), (1, 5), (6, None))}, {"X": 30})
    rep = suggest_refinement(crn, build_abstraction(crn, p))
    assert not any(s.state == (1,) for s in rep.spans)
    bi = parse_crn("species A, B\ninit A=5, B=5\nr x: A + B -> A @ 1\n")
    narrow = make_partition(bi, {"A": ((0, 0), (1, None)), "B": ((0, 0), (1, 5), (6, None))}, {"A": 5, "B": 6})
    assert not [s for s in suggest_refinement(bi, build_abstraction(bi, narrow)).spans if s.state == (1, 1)]
    wide = make_partition(bi, {"A": ((0, 0), (1, None)), "B": ((0, 0), (1, 11), (12, None))}, {"A": 11, "B": 12})
    crn2 = parse_crn("species A, B\ninit A=11, B=5\nr x: A + B -> A @ 1\n")
    spans = suggest_refinement(crn2, build_abstraction(crn2, wide)).spans
    assert [(s.state, s.span) for s in spans if s.state == (1, 1)] == [((1, 1), 2)]
    with pytest.raises(ValueError):
        suggest_refinement(crn2, build_abstraction(crn2, wide), span_threshold=0)


def test_refinement_flags_reachable_top():
    crn = corpus.model("gene_slow")
    a = build_abstraction(crn, corpus.config("gene_refined").partition(crn))
    msgs = suggest_refinement(crn, a).messages(a.partition)
    assert any("top level of P" in m for m in msgs)


def test_config_parsing():
    cfg = parse_config(
        "levels P: 0 | 1..99 | 100..\nbound P = 1000\nprune 1\noutput out\naggregate M+D: M + D  # display\n"
    )
    assert cfg.levels == {"P": ((0, 0), (1, 99), (100, None))}
    assert cfg.bounds == {"P": 1000} and cfg.prune == 1 and cfg.output == "out"
    assert cfg.aggregates == {"M+D": ("M", "D")}
    for bad in ("levels P 0 | 1..", "levels P: 0 | x", "bound P 3", "prune -1", "frobnicate", "aggregate M"):
        with pytest.raises(ParseError):
            parse_config(bad)


@pytest.mark.parametrize("model, cfg", [
    ("degradation", "degradation"), ("gene_slow", "gene_coarse"), ("gene_slow", "gene_refined"),
    ("gene_fast", "gene_refined"), ("goutsias", "goutsias"), ("viral", "viral"),
])
def test_corpus_partitions_valid(model, cfg):
    crn = corpus.model(model)
    assert validate_partition(crn, corpus.config(cfg).partition(crn)) == []
