"""Hypothesis strategies shared by the property tests."""

from fractions import Fraction

from hypothesis import strategies as st

from sqcrn.abstraction import AbstractCTMC


@st.composite
def abstract_ctmcs(draw, max_states=8, max_edges=20):
    n = draw(st.integers(1, max_states))
    states = [f"s{i}" for i in range(n)]
    edges = []
    if n > 1:
        pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] != p[1])
        for k, (i, j) in enumerate(draw(st.lists(pairs, max_size=max_edges))):
            # rates m * 10^e with a small mantissa so ties in magnitude are common
            rate = Fraction(draw(st.integers(1, 9))) * Fraction(10) ** draw(st.integers(-4, 3))
            edges.append((states[i], f"r{k}", states[j], rate))
    return AbstractCTMC.from_edges(states, edges, states[0])
