"""Serialisation of analysis reports.

JSON output keeps insertion order (stable across runs), writes exact
rationals as ``"p/q"`` strings and magnitudes as integers. The shipped
``report.schema.json`` describes the document.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources

from .abstraction import magnitude, time_magnitude
from .analysis import AnalysisReport

FORMAT = "sqcrn-report/1"


def rational(x: Fraction | None) -> str | None:
    return None if x is None else str(Fraction(x))


def _prob(p: float) -> float:
    return float(f"{p:.6g}")


def report_to_dict(report: AnalysisReport) -> dict:
    a = report.ctmc
    label = a.state_label
    tr = a.transitions

    def edge(k: int) -> dict:
        t = tr[k]
        return {"source": label(t.source), "reaction": t.reaction, "target": label(t.target)}

    components = []
    for c in report.components:
        total = sum(c.steady_state.values()) if c.steady_state else None
        components.append(
            {
                "id": c.id,
                "iteration": c.iteration,
                "kind": c.kind,
                "origin": c.origin,
                "parents": list(c.parents),
                "states": [label(s) for s in c.states],
                "steady_state": [
                    {
                        "state": label(s),
                        "weight": rational(c.steady_state[s]),
                        "magnitude": c.steady_magnitudes[s],
                        "share": rational(c.steady_state[s] / total),
                    }
                    for s in c.states
                    if s in c.steady_state
                ],
                "time_to_exit": rational(c.time_to_exit),
                "time_magnitude": c.exit_time_magnitude,
                "exit_states": [
                    {
                        "state": label(s),
                        "time_to_exit": rational(c.exit_times[s]),
                        "time_magnitude": time_magnitude(c.exit_times[s]),
                    }
                    for s in c.exit_states
                ],
            }
        )

    exits = [
        {
            "component": e.component,
            **edge(e.transition),
            "rate": rational(e.rate),
            "rate_magnitude": magnitude(e.rate),
            "staying_rate": rational(e.staying_rate),
            "exiting_rate": rational(e.exiting_rate),
            "time_to_exit": rational(e.time_to_exit),
            "time_magnitude": e.time_magnitude,
            "share": rational(e.share),
            "share_magnitude": e.share_magnitude,
        }
        for e in report.exits
    ]
    paths = [
        {
            "from_component": p.source_component,
            "start": label(p.start),
            "to_component": p.target_component,
            "via": None if p.via_exit is None else tr[p.via_exit].reaction,
            "states": [label(s) for s in p.states],
            "reactions": [tr[k].reaction for k in p.transitions],
            "min_rate": rational(p.min_rate),
            "count": p.count,
            "time": rational(p.time),
            "time_magnitude": p.time_magnitude,
            "probability": _prob(p.probability),
            "probability_magnitude": p.probability_magnitude,
        }
        for p in report.paths
    ]
    merges = [
        {
            "kind": m.kind,
            "source": m.source,
            "reached": m.reached,
            "result": m.result,
            "added_states": [label(s) for s in m.added_states],
        }
        for m in report.merges
    ]

    iterations = []
    for k in report.iterations:
        iterations.append(
            {
                "index": k,
                "components": [c["id"] for c in components if c["iteration"] == k],
                "exits": [x for x, e in zip(exits, report.exits) if e.iteration == k],
                "paths": [x for x, p in zip(paths, report.paths) if p.iteration == k],
                "merges": [x for x, m in zip(merges, report.merges) if m.iteration == k],
            }
        )

    out: dict = {"format": FORMAT}
    if a.crn is not None:
        out["model"] = {"species": list(a.crn.species_names), "time_unit": a.crn.time_unit}
    out["pruning"] = report.pruned.level
    out["abstraction"] = {
        "states": len(a.states),
        "transitions": len(tr),
        "kept": len(report.pruned.kept),
        "initial": label(a.initial),
    }
    out["components"] = components
    out["iterations"] = iterations
    out["bottom"] = [c.id for c in report.bottom_components]
    out["processing_order"] = list(report.processing_order)
    return out


def report_to_json(report: AnalysisReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def load_schema() -> dict:
    return json.loads(resources.files("sqcrn").joinpath("report.schema.json").read_text(encoding="utf-8"))


def _tmag(m) -> str:
    return "-" if m is None else f"10^{m}"


def report_to_text(report: AnalysisReport) -> str:
    d = report_to_dict(report)
    unit = d.get("model", {}).get("time_unit") or ""
    unit = f" {unit}" if unit else ""
    comps = {c["id"]: c for c in d["components"]}
    lines = [
        f"abstraction: {d['abstraction']['states']} states, {d['abstraction']['transitions']} transitions, "
        f"{d['abstraction']['kept']} kept at pruning level {d['pruning']}",
        f"initial: {d['abstraction']['initial']}",
        "",
    ]
    for it in d["iterations"]:
        lines.append(f"iteration {it['index']}")
        for cid in it["components"]:
            c = comps[cid]
            lines.append(f"  C{cid} [{c['kind']}, {c['origin']}] {len(c['states'])} state(s)")
            for ss in c["steady_state"]:
                lines.append(f"    {ss['state']}  ~10^{ss['magnitude']}")
            if c["time_to_exit"] is not None:
                lines.append(f"    time to exit {_tmag(c['time_magnitude'])}{unit}")
        for e in it["exits"]:
            lines.append(
                f"  exit C{e['component']}: {e['source']} --{e['reaction']}, 10^{e['rate_magnitude']}--> "
                f"{e['target']}  time {_tmag(e['time_magnitude'])}{unit}, share 10^{e['share_magnitude']}"
            )
        for p in it["paths"]:
            lines.append(
                f"  path C{p['from_component']} -> C{p['to_component']} from {p['start']}: "
                f"{len(p['reactions'])} step(s), time {_tmag(p['time_magnitude'])}{unit}, "
                f"probability {_tmag(p['probability_magnitude'])}"
            )
        for m in it["merges"]:
            extra = f" (+{len(m['added_states'])} states)" if m["added_states"] else ""
            result = f" -> C{m['result']}" if m["result"] is not None else ""
            lines.append(f"  {m['kind']}: C{m['source']} reaches C{m['reached']}{result}{extra}")
        lines.append("")
    bottom = ", ".join(f"C{b}" for b in d["bottom"]) or "none"
    lines.append(f"bottom components: {bottom}")
    return "\n".join(lines) + "\n"
