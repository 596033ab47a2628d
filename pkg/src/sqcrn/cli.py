"""Command-line front end.

    sqcrn analyze <model> --config <cfg> [--prune n] [--out dir] [--format text,json,dot]
    sqcrn validate <model> --config <cfg> --caps <list> [--seeds k]
    sqcrn check <model> [--config cfg]

A model argument that is not an existing file but names a bundled model
(e.g. ``gene_slow``) is taken from the corpus; likewise for configs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from . import corpus
from .abstraction import PartitionError, build_abstraction, suggest_refinement, validate_partition
from .analysis import analyze
from .config import AnalysisConfig, load_config
from .crn import ParseError, load_crn
from .dot import export_dot, export_report_dot
from .pruning import prune
from .report import report_to_json, report_to_text

FORMATS = ("text", "json", "dot")


class CLIError(Exception):
    pass


def _resolve(arg: str, kind: str) -> Path:
    p = Path(arg)
    if p.is_file():
        return p
    names = corpus.MODELS if kind == "model" else corpus.CONFIGS
    if arg in names:
        return Path(str(corpus.path(f"{arg}.{'crn' if kind == 'model' else 'cfg'}")))
    raise CLIError(f"{kind} file not found: {arg}")


def _load(args):
    mpath = _resolve(args.model, "model")
    try:
        crn = load_crn(mpath)
    except ParseError as exc:
        raise CLIError(f"{mpath}: {exc}") from exc
    cfg = AnalysisConfig()
    if args.config:
        cpath = _resolve(args.config, "config")
        try:
            cfg = load_config(cpath)
        except ParseError as exc:
            raise CLIError(f"{cpath}: {exc}") from exc
    try:
        partition = cfg.partition(crn)
    except PartitionError as exc:
        raise CLIError(f"{args.config}: {exc}") from exc
    violations = validate_partition(crn, partition)
    if violations:
        raise CLIError("invalid partition: " + "; ".join(map(str, violations)))
    return crn, cfg, partition


def _formats(text: str) -> list[str]:
    out = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in out if f not in FORMATS]
    if bad or not out:
        raise CLIError(f"unknown format(s): {', '.join(bad) or '(empty)'}; choose from {', '.join(FORMATS)}")
    return out


def cmd_analyze(args) -> int:
    crn, cfg, partition = _load(args)
    formats = _formats(args.format)
    level = cfg.prune if args.prune is None else args.prune
    if level < 0:
        raise CLIError("--prune must be >= 0")
    actmc = build_abstraction(crn, partition)
    for msg in suggest_refinement(crn, actmc).messages(partition):
        print(f"warning: {msg}", file=sys.stderr)
    pruned = prune(actmc, level)
    report = analyze(actmc, pruned)

    outdir = args.out or cfg.output
    if outdir is None:
        if "text" in formats:
            sys.stdout.write(report_to_text(report))
        if "json" in formats:
            sys.stdout.write(report_to_json(report))
        if "dot" in formats:
            sys.stdout.write(export_report_dot(report))
        return 0

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    if "dot" in formats:
        files["abstraction.dot"] = export_dot(actmc, pruned)
        files["pruned.dot"] = export_report_dot(report)
    if "json" in formats:
        files["report.json"] = report_to_json(report)
    if "text" in formats:
        files["report.txt"] = report_to_text(report)
    for name, body in files.items():
        (out / name).write_text(body, encoding="utf-8")
        print(out / name)
    return 0


def _caps(text: str, n: int) -> tuple[int, ...]:
    try:
        caps = [int(c) for c in text.split(",")]
    except ValueError as exc:
        raise CLIError(f"--caps expects comma-separated integers, got {text!r}") from exc
    if len(caps) == 1:
        caps *= n
    if len(caps) != n or min(caps) < 0:
        raise CLIError(f"--caps needs 1 or {n} non-negative values")
    return tuple(caps)


def cmd_validate(args) -> int:
    from .validate import validate_against_oracle

    crn, cfg, partition = _load(args)
    caps = _caps(args.caps, len(crn.species))
    level = cfg.prune if args.prune is None else args.prune
    rows = validate_against_oracle(crn, partition, caps, prune_level=level, seeds=args.seeds)
    if not rows:
        print("nothing to compare")
    for r in rows:
        print(r.line())
    worst = max((r.delta for r in rows if r.delta is not None), default=None)
    if worst is not None:
        print(f"max |delta| = {worst}")
    return 0


def cmd_check(args) -> int:
    crn, _, partition = _load(args)
    print(f"{args.model}: {len(crn.species)} species, {len(crn.reactions)} reactions")
    for i, name in enumerate(partition.species):
        levels = " | ".join(partition.interval_text(i, k) for k in range(len(partition.levels[i])))
        print(f"  {name}: {levels} (bound {partition.bounds[i]})")
    print("partition ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqcrn", description="Semi-quantitative analysis of stochastic CRNs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required):
        p.add_argument("model", help="model file (.crn) or bundled model name")
        p.add_argument("--config", required=config_required, help="partition config file or bundled config name")

    p = sub.add_parser("analyze", help="abstract, prune and analyse a model")
    common(p, False)
    p.add_argument("--prune", type=int, default=None, help="pruning level n (default: config value, else 0)")
    p.add_argument("--out", default=None, help="output directory (default: print to stdout)")
    p.add_argument("--format", default="text", help="comma-separated subset of text,json,dot")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("validate", help="compare reported magnitudes against the bounded concrete chain")
    common(p, False)
    p.add_argument("--caps", required=True, help="population caps, one value or one per species")
    p.add_argument("--seeds", type=int, default=0, help="number of SSA runs for branch frequencies")
    p.add_argument("--prune", type=int, default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="parse a model and validate its partition")
    common(p, False)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, OSError) as exc:
        print(f"sqcrn: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
