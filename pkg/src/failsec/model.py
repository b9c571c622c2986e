"""In-memory architecture: component kinds, instances and single-driver nets.

An :class:`Endpoint` is either a product port (``instance is None``) or a
port on a component instance. Whether it is an input or an output follows
from where it sits in a :class:`Net`: a driver is a product input or an
instance output, a reader is an instance input or a product output.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

__all__ = [
    "SourceSpan",
    "PortRef",
    "NullLit",
    "Ctor",
    "IfEq",
    "Expr",
    "ComponentKind",
    "Instance",
    "Endpoint",
    "Net",
    "Architecture",
    "Diagnostic",
    "CycleError",
    "RESERVED_WORDS",
    "validate",
    "dataflow_order",
    "has_errors",
]

RESERVED_WORDS = frozenset(
    {"component", "product", "use", "connect", "null", "if", "then", "else"}
)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}"


# -- behavior expressions ---------------------------------------------------


@dataclass(frozen=True)
class PortRef:
    port: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NullLit:
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Ctor:
    constructor: str
    args: tuple[Expr, ...]
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IfEq:
    left: Expr
    right: Expr
    then: Expr
    orelse: Expr
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


Expr = Union[PortRef, NullLit, Ctor, IfEq]


def _walk(expr: Expr):
    stack = [expr]
    while stack:
        e = stack.pop()
        yield e
        if isinstance(e, Ctor):
            stack.extend(reversed(e.args))
        elif isinstance(e, IfEq):
            stack.extend((e.orelse, e.then, e.right, e.left))


# -- structure --------------------------------------------------------------


@dataclass(frozen=True)
class ComponentKind:
    """A reusable component type.

    ``behavior`` holds ``(output port, expression)`` pairs in declaration
    order. A well-formed kind has exactly one pair per output port.
    """

    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    behavior: tuple[tuple[str, Expr], ...]
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    @cached_property
    def behavior_map(self) -> dict[str, Expr]:
        return dict(self.behavior)


@dataclass(frozen=True)
class Instance:
    name: str
    kind: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Endpoint:
    instance: Optional[str]
    port: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __str__(self):
        return self.port if self.instance is None else f"{self.instance}.{self.port}"

    @property
    def key(self) -> tuple[Optional[str], str]:
        return (self.instance, self.port)


@dataclass(frozen=True)
class Net:
    driver: Endpoint
    readers: tuple[Endpoint, ...]
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    @property
    def name(self) -> str:
        return str(self.driver)


@dataclass(frozen=True)
class Architecture:
    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    kinds: tuple[ComponentKind, ...]
    instances: tuple[Instance, ...]
    nets: tuple[Net, ...]
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    @cached_property
    def kind_map(self) -> dict[str, ComponentKind]:
        # first declaration wins; duplicates are reported by validate()
        out: dict[str, ComponentKind] = {}
        for k in self.kinds:
            out.setdefault(k.name, k)
        return out

    @cached_property
    def instance_map(self) -> dict[str, Instance]:
        out: dict[str, Instance] = {}
        for inst in self.instances:
            out.setdefault(inst.name, inst)
        return out

    def kind_of(self, instance: str) -> ComponentKind:
        return self.kind_map[self.instance_map[instance].kind]

    @cached_property
    def driver_index(self) -> dict[tuple[Optional[str], str], int]:
        """Driver endpoint key -> net id."""
        out: dict[tuple[Optional[str], str], int] = {}
        for i, net in enumerate(self.nets):
            out.setdefault(net.driver.key, i)
        return out

    @cached_property
    def reader_index(self) -> dict[tuple[Optional[str], str], int]:
        """Reader endpoint key -> net id."""
        out: dict[tuple[Optional[str], str], int] = {}
        for i, net in enumerate(self.nets):
            for r in net.readers:
                out.setdefault(r.key, i)
        return out

    def net_name(self, net_id: int) -> str:
        return self.nets[net_id].name


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Optional[SourceSpan] = None

    @property
    def is_error(self) -> bool:
        return self.code.startswith("E_")

    def __str__(self):
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.code}: {self.message}"


class CycleError(ValueError):
    code = "E_CYCLE"


def has_errors(diags) -> bool:
    return any(d.is_error for d in diags)


def _bad_name(name: str) -> bool:
    return not _IDENT.match(name) or name in RESERVED_WORDS


def _check_kind(kind: ComponentKind, diags: list[Diagnostic]) -> None:
    sp = kind.span
    if not kind.inputs or not kind.outputs:
        diags.append(Diagnostic(
            "E_ZERO_PORT_KIND",
            f"component {kind.name} needs at least one input and one output",
            sp,
        ))
    seen: set[str] = set()
    for port in kind.inputs + kind.outputs:
        if _bad_name(port):
            diags.append(Diagnostic("E_BAD_NAME", f"{kind.name}: invalid port name {port!r}", sp))
        if port in seen:
            diags.append(Diagnostic("E_DUP_NAME", f"{kind.name}: duplicate port {port}", sp))
        seen.add(port)

    assigned: set[str] = set()
    for port, expr in kind.behavior:
        if port not in kind.outputs:
            diags.append(Diagnostic(
                "E_BAD_PORT_REF",
                f"{kind.name}: behavior assigned to {port}, which is not an output",
                getattr(expr, "span", None) or sp,
            ))
        elif port in assigned:
            diags.append(Diagnostic(
                "E_DUP_NAME",
                f"{kind.name}: output {port} has more than one behavior",
                getattr(expr, "span", None) or sp,
            ))
        assigned.add(port)
        for e in _walk(expr):
            if isinstance(e, PortRef) and e.port not in kind.inputs:
                diags.append(Diagnostic(
                    "E_BAD_PORT_REF",
                    f"{kind.name}: expression reads {e.port}, which is not an input",
                    e.span or sp,
                ))
            elif isinstance(e, Ctor):
                if not e.args:
                    diags.append(Diagnostic(
                        "E_BAD_EXPR",
                        f"{kind.name}: constructor {e.constructor} applied to no arguments",
                        e.span or sp,
                    ))
                if _bad_name(e.constructor):
                    diags.append(Diagnostic(
                        "E_BAD_NAME",
                        f"{kind.name}: invalid constructor name {e.constructor!r}",
                        e.span or sp,
                    ))
    for port in kind.outputs:
        if port not in assigned:
            diags.append(Diagnostic(
                "E_MISSING_BEHAVIOR", f"{kind.name}: output {port} has no behavior", sp
            ))


def validate(arch: Architecture) -> list[Diagnostic]:
    """Check every well-formedness rule; return diagnostics in a fixed order.

    An empty list means the architecture is valid and free of warnings.
    Codes starting with ``E_`` are errors, ``W_`` are warnings.
    """
    diags: list[Diagnostic] = []

    names: set[str] = set()
    for kind in arch.kinds:
        if _bad_name(kind.name):
            diags.append(Diagnostic("E_BAD_NAME", f"invalid component name {kind.name!r}", kind.span))
        if kind.name in names:
            diags.append(Diagnostic("E_DUP_NAME", f"duplicate component {kind.name}", kind.span))
        names.add(kind.name)
        _check_kind(kind, diags)

    if _bad_name(arch.name):
        diags.append(Diagnostic("E_BAD_NAME", f"invalid product name {arch.name!r}", arch.span))
    ports: set[str] = set()
    for port in arch.inputs + arch.outputs:
        if _bad_name(port):
            diags.append(Diagnostic("E_BAD_NAME", f"invalid product port name {port!r}", arch.span))
        if port in ports:
            diags.append(Diagnostic("E_DUP_NAME", f"duplicate product port {port}", arch.span))
        ports.add(port)

    inst_names: set[str] = set()
    for inst in arch.instances:
        if _bad_name(inst.name):
            diags.append(Diagnostic("E_BAD_NAME", f"invalid instance name {inst.name!r}", inst.span))
        if inst.name in inst_names:
            diags.append(Diagnostic("E_DUP_NAME", f"duplicate instance {inst.name}", inst.span))
        inst_names.add(inst.name)
        if inst.kind not in arch.kind_map:
            diags.append(Diagnostic(
                "E_UNKNOWN_KIND", f"instance {inst.name} uses unknown component {inst.kind}", inst.span
            ))

    def resolve(ep: Endpoint, driving: bool) -> bool:
        if ep.instance is None:
            pool = arch.inputs if driving else arch.outputs
            role = "product input" if driving else "product output"
            if ep.port not in pool:
                diags.append(Diagnostic("E_BAD_PORT_REF", f"{ep} is not a {role}", ep.span))
                return False
            return True
        inst = arch.instance_map.get(ep.instance)
        if inst is None:
            diags.append(Diagnostic("E_BAD_PORT_REF", f"unknown instance {ep.instance} in {ep}", ep.span))
            return False
        kind = arch.kind_map.get(inst.kind)
        if kind is None:
            return False
        pool = kind.outputs if driving else kind.inputs
        role = "output" if driving else "input"
        if ep.port not in pool:
            diags.append(Diagnostic(
                "E_BAD_PORT_REF", f"{ep}: {kind.name} has no {role} port {ep.port}", ep.span
            ))
            return False
        return True

    driven: dict[tuple, int] = {}
    read: dict[tuple, int] = {}
    for i, net in enumerate(arch.nets):
        if resolve(net.driver, driving=True):
            if net.driver.key in driven:
                diags.append(Diagnostic(
                    "E_MULTI_DRIVER", f"{net.driver} drives more than one net", net.driver.span or net.span
                ))
            else:
                driven[net.driver.key] = i
        if not net.readers:
            code = "W_DANGLING_INPUT" if net.driver.instance is None else "W_DANGLING_OUTPUT"
            diags.append(Diagnostic(code, f"{net.driver} drives nothing", net.span))
        for r in net.readers:
            if not resolve(r, driving=False):
                continue
            if r.key in read:
                diags.append(Diagnostic(
                    "E_MULTI_DRIVER",
                    f"{r} is driven by both {arch.nets[read[r.key]].driver} and {net.driver}",
                    r.span or net.span,
                ))
            else:
                read[r.key] = i

    for port in arch.outputs:
        if (None, port) not in read:
            diags.append(Diagnostic("E_UNCONNECTED_INPUT", f"product output {port} is not connected", arch.span))
    for port in arch.inputs:
        if (None, port) not in driven:
            diags.append(Diagnostic("W_DANGLING_INPUT", f"product input {port} is not connected", arch.span))
    for inst in arch.instances:
        kind = arch.kind_map.get(inst.kind)
        if kind is None:
            continue
        for port in kind.inputs:
            if (inst.name, port) not in read:
                diags.append(Diagnostic(
                    "E_UNCONNECTED_INPUT", f"{inst.name}.{port} is not connected", inst.span
                ))
        for port in kind.outputs:
            if (inst.name, port) not in driven:
                diags.append(Diagnostic(
                    "W_DANGLING_OUTPUT", f"{inst.name}.{port} drives nothing", inst.span
                ))

    _, stuck = _toposort(arch)
    if stuck:
        diags.append(Diagnostic(
            "E_CYCLE",
            "dataflow cycle through " + ", ".join(arch.instances[i].name for i in stuck),
            arch.instances[stuck[0]].span,
        ))
    return diags


def _toposort(arch: Architecture) -> tuple[list[int], list[int]]:
    """Kahn's algorithm over instance indices.

    Ties go to the earliest declared instance. Returns the order and the
    indices that could not be scheduled (non-empty only on a cycle).
    """
    index = {}
    for i, inst in enumerate(arch.instances):
        index.setdefault(inst.name, i)
    succ: list[set[int]] = [set() for _ in arch.instances]
    indeg = [0] * len(arch.instances)
    for net in arch.nets:
        src = index.get(net.driver.instance) if net.driver.instance else None
        if src is None:
            continue
        for r in net.readers:
            dst = index.get(r.instance) if r.instance else None
            if dst is not None and dst not in succ[src]:
                succ[src].add(dst)
                indeg[dst] += 1
    ready = [i for i, d in enumerate(indeg) if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(ready, j)
    scheduled = set(order)
    return order, [i for i in range(len(arch.instances)) if i not in scheduled]


def dataflow_order(arch: Architecture) -> list[Instance]:
    order, stuck = _toposort(arch)
    if stuck:
        raise CycleError(
            "dataflow cycle through " + ", ".join(arch.instances[i].name for i in stuck)
        )
    return [arch.instances[i] for i in order]
