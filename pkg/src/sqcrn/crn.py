"""Chemical reaction networks: data model, text format and mass-action propensities.

Model documents are line oriented::

    # comment
    species A, B, C
    unit h
    init A=10, B=2
    r t1: A + B -> 2 C @ 0.5
    r deg: C -> 0 @ 1e-4

The empty complex is written ``0``. Unlisted species start at population 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

ConcreteState = tuple[int, ...]

_NAME = r"[A-Za-z_][A-Za-z0-9_.]*"
_NAME_RE = re.compile(rf"^{_NAME}$")
_TERM_RE = re.compile(rf"^(?:(\d+)\s*)?({_NAME})$")
_REACTION_RE = re.compile(rf"^r\s+({_NAME})\s*:\s*(.*?)\s*->\s*(.*?)\s*@\s*(\S+)\s*$")


class ParseError(ValueError):
    """Malformed model or config document."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class NotEnabledError(ValueError):
    pass


@dataclass(frozen=True)
class Species:
    name: str
    index: int


@dataclass(frozen=True)
class Reaction:
    label: str
    reactants: tuple[int, ...]
    products: tuple[int, ...]
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"reaction {self.label}: rate must be positive, got {self.rate}")
        if len(self.reactants) != len(self.products):
            raise ValueError(f"reaction {self.label}: complex lengths differ")
        if any(v < 0 for v in self.reactants + self.products):
            raise ValueError(f"reaction {self.label}: negative stoichiometry")

    @property
    def change(self) -> tuple[int, ...]:
        return tuple(p - r for r, p in zip(self.reactants, self.products))

    @property
    def exact_rate(self) -> Fraction:
        # repr of a float is its shortest round-tripping decimal, i.e. the literal that was parsed
        return Fraction(repr(self.rate))


@dataclass(frozen=True)
class CRN:
    species: tuple[Species, ...]
    reactions: tuple[Reaction, ...]
    initial_state: ConcreteState
    time_unit: str = ""

    def __post_init__(self):
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise ValueError("duplicate species names")
        if [s.index for s in self.species] != list(range(len(names))):
            raise ValueError("species indices must be 0..n-1 in order")
        n = len(names)
        if len(self.initial_state) != n:
            raise ValueError("initial state length does not match species count")
        if any(x < 0 for x in self.initial_state):
            raise ValueError("negative initial population")
        for reaction in self.reactions:
            if len(reaction.reactants) != n:
                raise ValueError(f"reaction {reaction.label}: vector length does not match species count")

    @classmethod
    def build(
        cls,
        species: Sequence[str],
        reactions: Iterable[tuple[str, dict[str, int], dict[str, int], float]],
        initial: dict[str, int] | None = None,
        time_unit: str = "",
    ) -> "CRN":
        """Convenience constructor from names and ``{species: coefficient}`` complexes."""
        index = {name: i for i, name in enumerate(species)}
        built = []
        for label, lhs, rhs, rate in reactions:
            r = [0] * len(species)
            p = [0] * len(species)
            for name, c in lhs.items():
                r[index[name]] += c
            for name, c in rhs.items():
                p[index[name]] += c
            built.append(Reaction(label, tuple(r), tuple(p), float(rate)))
        init = [0] * len(species)
        for name, value in (initial or {}).items():
            init[index[name]] = value
        return cls(
            tuple(Species(name, i) for i, name in enumerate(species)),
            tuple(built),
            tuple(init),
            time_unit,
        )

    @property
    def species_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.species)

    def species_index(self, name: str) -> int:
        for s in self.species:
            if s.name == name:
                return s.index
        raise KeyError(name)

    def reaction(self, label: str) -> Reaction:
        for r in self.reactions:
            if r.label == label:
                return r
        raise KeyError(label)

    def max_reactant_coefficient(self, species: int) -> int:
        return max((r.reactants[species] for r in self.reactions), default=0)


def enabled(reaction: Reaction, state: Sequence[int]) -> bool:
    return all(x >= r for x, r in zip(state, reaction.reactants))


def apply_reaction(state: Sequence[int], reaction: Reaction) -> ConcreteState:
    if not enabled(reaction, state):
        raise NotEnabledError(f"reaction {reaction.label} is not enabled in state {tuple(state)}")
    return tuple(x + d for x, d in zip(state, reaction.change))


def combinations(state: Sequence[int], reaction: Reaction) -> int:
    """Product of binomial coefficients C(x_l, r_l); zero iff the reaction is disabled."""
    c = 1
    for x, r in zip(state, reaction.reactants):
        if r:
            c *= math.comb(x, r)
    return c


def propensity(crn: CRN, reaction: Reaction, state: Sequence[int]) -> float:
    return reaction.rate * combinations(state, reaction)


def exact_propensity(reaction: Reaction, state: Sequence[int]) -> Fraction:
    return reaction.exact_rate * combinations(state, reaction)


def total_rate_matrix_entry(crn: CRN, source: Sequence[int], target: Sequence[int]) -> float:
    """Sum of propensities of all reactions moving ``source`` to ``target``."""
    target = tuple(target)
    total = 0.0
    for reaction in crn.reactions:
        if enabled(reaction, source) and tuple(x + d for x, d in zip(source, reaction.change)) == target:
            total += propensity(crn, reaction, source)
    return total


# --- text format -----------------------------------------------------------


def _split_list(body: str) -> list[str]:
    return [item.strip() for item in body.split(",") if item.strip()]


def _parse_complex(text: str, index: dict[str, int], lineno: int) -> list[int]:
    vector = [0] * len(index)
    text = text.strip()
    if text == "0" or text == "":
        if text == "":
            raise ParseError("empty complex (write 0 for the empty complex)", lineno)
        return vector
    for term in text.split("+"):
        term = term.strip()
        m = _TERM_RE.match(term)
        if not m:
            raise ParseError(f"malformed term {term!r}", lineno)
        coefficient = int(m.group(1)) if m.group(1) else 1
        name = m.group(2)
        if name not in index:
            raise ParseError(f"undeclared species {name!r}", lineno)
        vector[index[name]] += coefficient
    return vector


def parse_crn(text: str) -> CRN:
    species: list[str] = []
    index: dict[str, int] = {}
    initial: dict[str, tuple[int, int]] = {}
    raw_reactions: list[tuple[int, str, str, str, str]] = []
    unit = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, body = line.partition(" ")
        body = body.strip()
        if keyword == "species":
            for name in _split_list(body):
                if not _NAME_RE.match(name):
                    raise ParseError(f"invalid species name {name!r}", lineno)
                if name in index:
                    raise ParseError(f"duplicate species {name!r}", lineno)
                index[name] = len(species)
                species.append(name)
        elif keyword == "unit":
            unit = body
        elif keyword == "init":
            for item in _split_list(body):
                name, eq, value = item.partition("=")
                name, value = name.strip(), value.strip()
                if not eq or not value.isdigit():
                    raise ParseError(f"malformed initial value {item!r}", lineno)
                initial[name] = (int(value), lineno)
        elif keyword == "r":
            m = _REACTION_RE.match(line)
            if not m:
                raise ParseError(f"malformed reaction line {line!r}", lineno)
            raw_reactions.append((lineno, *m.groups()))
        else:
            raise ParseError(f"unknown directive {keyword!r}", lineno)

    reactions = []
    labels = set()
    for lineno, label, lhs, rhs, rate_text in raw_reactions:
        if label in labels:
            raise ParseError(f"duplicate reaction label {label!r}", lineno)
        labels.add(label)
        try:
            rate = float(rate_text)
        except ValueError:
            raise ParseError(f"malformed rate {rate_text!r}", lineno) from None
        if not (rate > 0 and math.isfinite(rate)):
            raise ParseError(f"rate must be positive, got {rate_text}", lineno)
        r = _parse_complex(lhs, index, lineno)
        p = _parse_complex(rhs, index, lineno)
        reactions.append(Reaction(label, tuple(r), tuple(p), rate))

    init = [0] * len(species)
    for name, (value, lineno) in initial.items():
        if name not in index:
            raise ParseError(f"undeclared species {name!r}", lineno)
        init[index[name]] = value
    return CRN(
        tuple(Species(name, i) for i, name in enumerate(species)),
        tuple(reactions),
        tuple(init),
        unit,
    )


def _format_complex(vector: Sequence[int], names: Sequence[str]) -> str:
    terms = []
    for c, name in zip(vector, names):
        if c == 1:
            terms.append(name)
        elif c > 1:
            terms.append(f"{c} {name}")
    return " + ".join(terms) if terms else "0"


def format_crn(crn: CRN) -> str:
    names = crn.species_names
    lines = [f"species {', '.join(names)}"]
    if crn.time_unit:
        lines.append(f"unit {crn.time_unit}")
    init = [f"{n}={x}" for n, x in zip(names, crn.initial_state) if x]
    if init:
        lines.append(f"init {', '.join(init)}")
    for r in crn.reactions:
        lines.append(
            f"r {r.label}: {_format_complex(r.reactants, names)} -> "
            f"{_format_complex(r.products, names)} @ {r.rate!r}"
        )
    return "\n".join(lines) + "\n"


def load_crn(path) -> CRN:
    with open(path, encoding="utf-8") as fh:
        return parse_crn(fh.read())
