"""Text, JSON and DOT renderings of analysis results."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional, TextIO

from . import __version__
from .analyzer import Breach, FailSecureUpTo, Leak, Verdict
from .evaluator import FaultScenario
from .model import Architecture
from .values import atoms_of, parse_value, render

__all__ = [
    "TOOL",
    "Report",
    "emit_json",
    "emit_text",
    "emit_dot",
    "report_dict",
    "breach_from_json",
    "use_color",
]

TOOL = "failsec"


@dataclass
class Report:
    file: str
    verdict: Verdict
    max_faults: int
    elapsed_ms: int
    scenarios_checked: int
    arch: Architecture
    all_breaches: Optional[list[Breach]] = None
    version: str = field(default=__version__)


def _routing(scenario: FaultScenario, arch: Architecture) -> dict[str, dict[str, str]]:
    out = {}
    for name in sorted(scenario.faulty):
        routes = scenario.routing[name]
        # output ports in declaration order
        out[name] = {p: routes[p] for p in arch.kind_of(name).outputs}
    return out


def _breach_fields(b: Breach, arch: Architecture) -> dict:
    return {
        "faults": b.faults,
        "routing": _routing(b.scenario, arch),
        "valuation": {arch.net_name(i): render(v) for i, v in sorted(b.valuation.items())},
        "leaks": [
            {"output": lk.output, "value": render(lk.value), "matches_input": lk.matched_input}
            for lk in b.leaks
        ],
    }


def report_dict(report: Report) -> dict:
    v = report.verdict
    obj = {
        "tool": TOOL,
        "version": report.version,
        "file": report.file,
        "verdict": "fail-secure" if isinstance(v, FailSecureUpTo) else "breach",
        "max_faults": report.max_faults,
        "scenarios_checked": report.scenarios_checked,
        "elapsed_ms": report.elapsed_ms,
    }
    if isinstance(v, Breach):
        obj.update(_breach_fields(v, report.arch))
    if report.all_breaches is not None:
        obj["all_breaches"] = [_breach_fields(b, report.arch) for b in report.all_breaches]
    return obj


def emit_json(report: Report) -> str:
    return json.dumps(report_dict(report), separators=(",", ":"))


def breach_from_json(text: str, arch: Architecture) -> Breach:
    """Rebuild a :class:`Breach` from a ``check --format json`` report.

    Net names in the valuation are resolved against ``arch``.
    """
    obj = json.loads(text)
    if obj.get("verdict") != "breach":
        raise ValueError("report does not describe a breach")
    routing = {k: dict(v) for k, v in obj["routing"].items()}
    scenario = FaultScenario(frozenset(obj["faults"]), routing)
    ids = {arch.net_name(i): i for i in range(len(arch.nets))}
    valuation = {}
    for name, s in obj["valuation"].items():
        if name not in ids:
            raise ValueError(f"unknown net {name}")
        valuation[ids[name]] = parse_value(s)
    leaks = tuple(
        Leak(lk["output"], parse_value(lk["value"]), lk["matches_input"]) for lk in obj["leaks"]
    )
    return Breach(scenario, valuation, leaks, obj.get("scenarios_checked", 0))


# -- text --------------------------------------------------------------------


def use_color(stream: TextIO) -> bool:
    if os.environ.get("NO_COLOR"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _style(text: str, code: str, color: bool) -> str:
    return f"\x1b[{code}m{text}\x1b[0m" if color else text


def _breach_text(b: Breach, arch: Architecture, color: bool) -> list[str]:
    lines = [_style(f"BREACH with {len(b.faults)} fault(s): {', '.join(b.faults) or '(none)'}", "1;31", color)]
    for name, routes in _routing(b.scenario, arch).items():
        for out, src in routes.items():
            lines.append(f"  failed {name}: {out} <- {src}")
    leaked = {lk.output for lk in b.leaks}
    for lk in b.leaks:
        lines.append(f"  leak: {lk.output} = {render(lk.value)} (product input {lk.matched_input})")
    lines.append("  nets:")
    for i, v in sorted(b.valuation.items()):
        lines.append(f"    {arch.net_name(i)} = {render(v)}")
    for port in arch.outputs:
        net = arch.reader_index.get((None, port))
        if net is None or port in leaked:
            continue
        atoms = atoms_of(b.valuation[net])
        if atoms:
            lines.append(
                f"  note: {port} carries {render(b.valuation[net])}, "
                f"derived from {', '.join(sorted(atoms))} (not a verbatim leak)"
            )
    return lines


def emit_text(report: Report, color: bool = False) -> str:
    v = report.verdict
    if isinstance(v, FailSecureUpTo):
        lines = [
            _style(f"FAIL-SECURE up to {v.n} fault(s)", "1;32", color)
            + f": {report.arch.name}, {report.scenarios_checked} scenarios checked"
        ]
    elif report.all_breaches:
        lines = [f"{len(report.all_breaches)} breach(es) at {len(v.faults)} fault(s) "
                 f"({report.scenarios_checked} scenarios checked)"]
        for b in report.all_breaches:
            lines.extend(_breach_text(b, report.arch, color))
    else:
        lines = _breach_text(v, report.arch, color)
        lines.append(f"  ({report.scenarios_checked} scenarios checked)")
    return "\n".join(lines) + "\n"


# -- DOT ---------------------------------------------------------------------


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _node_id(ep, driving: bool) -> str:
    if ep.instance is not None:
        return _q(ep.instance)
    return _q(("in:" if driving else "out:") + ep.port)


def emit_dot(arch: Architecture, verdict: Optional[Verdict] = None) -> str:
    """Graphviz digraph of the architecture.

    Failed instances of a breach are filled; with a breach, every edge is
    labelled with its net name and the value the net carries.
    """
    breach = verdict if isinstance(verdict, Breach) else None
    faulty = breach.scenario.faulty if breach else frozenset()
    lines = [f"digraph {_q(arch.name)} {{", "  rankdir=LR;", '  node [fontname="Helvetica"];']
    for port in arch.inputs:
        lines.append(f"  {_q('in:' + port)} [shape=ellipse, label={_q(port)}];")
    for inst in arch.instances:
        label = _q(f"{inst.name}: {inst.kind}")
        if inst.name in faulty:
            lines.append(
                f'  {_q(inst.name)} [shape=box, style="rounded,filled", '
                f'fillcolor="#f4a3a3", label={label}];'
            )
        else:
            lines.append(f'  {_q(inst.name)} [shape=box, style=rounded, label={label}];')
    for port in arch.outputs:
        lines.append(f"  {_q('out:' + port)} [shape=ellipse, label={_q(port)}];")
    for i, net in enumerate(arch.nets):
        attrs = ""
        if breach is not None:
            attrs = f" [label={_q(f'{net.name} = {render(breach.valuation[i])}')}]"
        for r in net.readers:
            lines.append(f"  {_node_id(net.driver, True)} -> {_node_id(r, False)}{attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"
