"""Compute net values for one fault scenario.

Healthy instances evaluate their behavior expressions. A failed instance
ignores its behavior and copies, onto each output, the value present on one
of its inputs; which input is chosen per output is part of the scenario.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .model import Architecture, ComponentKind, Ctor, Expr, IfEq, NullLit, PortRef, dataflow_order
from .values import NULL, Atom, Term, Value

__all__ = [
    "FaultScenario",
    "Valuation",
    "ScenarioError",
    "Evaluator",
    "eval_expr",
    "evaluate",
    "enumerate_routings",
]

Valuation = dict[int, Value]


class ScenarioError(ValueError):
    """The scenario does not fit the architecture."""


@dataclass(frozen=True)
class FaultScenario:
    faulty: frozenset[str]
    routing: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    @classmethod
    def nominal(cls) -> FaultScenario:
        return cls(frozenset(), {})

    @classmethod
    def of(cls, routing: Mapping[str, Mapping[str, str]]) -> FaultScenario:
        return cls(frozenset(routing), {k: dict(v) for k, v in routing.items()})


def eval_expr(expr: Expr, env: Mapping[str, Value]) -> Value:
    if isinstance(expr, PortRef):
        return env[expr.port]
    if isinstance(expr, NullLit):
        return NULL
    if isinstance(expr, Ctor):
        return Term(expr.constructor, tuple(eval_expr(a, env) for a in expr.args))
    if isinstance(expr, IfEq):
        if eval_expr(expr.left, env) == eval_expr(expr.right, env):
            return eval_expr(expr.then, env)
        return eval_expr(expr.orelse, env)
    raise TypeError(f"not an expression: {expr!r}")


def enumerate_routings(kind: ComponentKind) -> list[dict[str, str]]:
    """Every way a failed ``kind`` can wire outputs to inputs.

    Outputs vary in declaration order with the last output changing
    fastest; each output tries inputs in declaration order.
    """
    return [
        dict(zip(kind.outputs, choice))
        for choice in itertools.product(kind.inputs, repeat=len(kind.outputs))
    ]


@dataclass(frozen=True)
class _Step:
    name: str
    kind: ComponentKind
    reads: tuple[tuple[str, int], ...]  # (input port, net id)
    writes: tuple[tuple[str, int], ...]  # (output port, net id); dangling outputs omitted


class Evaluator:
    """Precomputed evaluation schedule for one validated architecture."""

    def __init__(self, arch: Architecture):
        self.arch = arch
        self.product_inputs = tuple(
            (arch.driver_index[(None, p)], Atom(p))
            for p in arch.inputs
            if (None, p) in arch.driver_index
        )
        steps = []
        for inst in dataflow_order(arch):
            kind = arch.kind_map[inst.kind]
            reads = tuple((p, arch.reader_index[(inst.name, p)]) for p in kind.inputs)
            writes = tuple(
                (p, arch.driver_index[(inst.name, p)])
                for p in kind.outputs
                if (inst.name, p) in arch.driver_index
            )
            steps.append(_Step(inst.name, kind, reads, writes))
        self.steps = tuple(steps)

    def check(self, s: FaultScenario) -> None:
        if set(s.faulty) != set(s.routing):
            raise ScenarioError("faulty instances and routed instances differ")
        for name, routes in s.routing.items():
            if name not in self.arch.instance_map:
                raise ScenarioError(f"unknown instance {name}")
            kind = self.arch.kind_of(name)
            if set(routes) != set(kind.outputs):
                raise ScenarioError(f"routing for {name} must cover exactly {', '.join(kind.outputs)}")
            for out, src in routes.items():
                if src not in kind.inputs:
                    raise ScenarioError(f"{name}.{out} routed from {src}, which is not an input")

    def evaluate(self, s: FaultScenario, check: bool = True) -> Valuation:
        if check:
            self.check(s)
        val: Valuation = dict(self.product_inputs)
        routing = s.routing
        for step in self.steps:
            env = {port: val[net] for port, net in step.reads}
            routes = routing.get(step.name)
            if routes is None:
                behavior = step.kind.behavior_map
                for port, net in step.writes:
                    val[net] = eval_expr(behavior[port], env)
            else:
                for port, net in step.writes:
                    val[net] = env[routes[port]]
        # keyed in net declaration order
        return {i: val[i] for i in range(len(self.arch.nets))}


def evaluate(arch: Architecture, s: FaultScenario) -> Valuation:
    return Evaluator(arch).evaluate(s)
