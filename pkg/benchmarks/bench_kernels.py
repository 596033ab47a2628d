"""Compare the compiled and pure-Python SSA kernels.

    python3 benchmarks/bench_kernels.py [--seeds 20] [--repeat 3]

Both backends consume the same random stream, so each row also checks that
the final states agree.
"""

from __future__ import annotations

import argparse
import sys
import time

from sqcrn import corpus, kernels
from sqcrn.ctmc import ssa_final_state, ssa_sample

CASES = [
    ("degradation", 2e4),
    ("gene_slow", 100.0),
    ("goutsias", 50.0),
    ("viral", 0.5),
]


def timed(fn, crn, horizon, seeds, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = [fn(crn, horizon, s, backend) for s in seeds]
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    py = kernels.backend_module("python")
    try:
        cy = kernels.backend_module("cython")
    except ImportError:
        print("compiled kernels not built; nothing to compare", file=sys.stderr)
        return 1

    seeds = range(args.seeds)
    print(f"{'model':<12} {'kernel':<7} {'python s':>9} {'cython s':>9} {'speedup':>8}  same")
    for name, horizon in CASES:
        crn = corpus.model(name)
        for label, fn in (("final", ssa_final_state), ("sample", ssa_sample)):
            tp, op = timed(fn, crn, horizon, seeds, py, args.repeat)
            tc, oc = timed(fn, crn, horizon, seeds, cy, args.repeat)
            print(f"{name:<12} {label:<7} {tp:9.3f} {tc:9.3f} {tp / tc:7.1f}x  {op == oc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
