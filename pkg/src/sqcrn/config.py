"""Partition / analysis config files.

::

    levels P: 0 | 1..99 | 100..
    bound P = 1000
    prune 0
    output results
    aggregate M+D: M + D     # display only

Species without a ``levels`` line get the default enabledness partition.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .abstraction import Interval, LevelPartition, make_partition
from .crn import CRN, ParseError

_LEVEL_RE = re.compile(r"^(\d+)(?:\.\.(\d*))?$")


@dataclass
class AnalysisConfig:
    levels: dict[str, tuple[Interval, ...]] = field(default_factory=dict)
    bounds: dict[str, int] = field(default_factory=dict)
    prune: int = 0
    output: str | None = None
    aggregates: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def partition(self, crn: CRN) -> LevelPartition:
        return make_partition(crn, self.levels, self.bounds)


def _parse_levels(body: str, lineno: int) -> tuple[Interval, ...]:
    out = []
    for part in body.split("|"):
        part = part.strip()
        m = _LEVEL_RE.match(part)
        if not m:
            raise ParseError(f"malformed level {part!r}", lineno)
        lo = int(m.group(1))
        if m.group(2) is None:
            out.append((lo, lo))
        elif m.group(2) == "":
            out.append((lo, None))
        else:
            out.append((lo, int(m.group(2))))
    return tuple(out)


def parse_config(text: str) -> AnalysisConfig:
    cfg = AnalysisConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, body = line.partition(" ")
        body = body.strip()
        if keyword == "levels":
            name, colon, spec = body.partition(":")
            if not colon:
                raise ParseError("expected 'levels <species>: ...'", lineno)
            cfg.levels[name.strip()] = _parse_levels(spec, lineno)
        elif keyword == "bound":
            name, eq, value = body.partition("=")
            if not eq or not value.strip().isdigit():
                raise ParseError("expected 'bound <species> = <nat>'", lineno)
            cfg.bounds[name.strip()] = int(value)
        elif keyword == "prune":
            if not body.isdigit():
                raise ParseError("prune level must be a natural number", lineno)
            cfg.prune = int(body)
        elif keyword == "output":
            cfg.output = body
        elif keyword == "aggregate":
            label, colon, members = body.partition(":")
            if not colon:
                raise ParseError("expected 'aggregate <label>: <species> + ...'", lineno)
            cfg.aggregates[label.strip()] = tuple(m.strip() for m in members.split("+") if m.strip())
        else:
            raise ParseError(f"unknown directive {keyword!r}", lineno)
    return cfg


def load_config(path) -> AnalysisConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
