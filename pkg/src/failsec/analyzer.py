"""Bounded fail-secure search.

The product is secure in a scenario when no product output carries a value
equal to a product input. It is fail-secure up to ``n`` faults when every
scenario with at most ``n`` failed instances, under every pass-through
routing of those instances, is secure.

Scenarios are searched by fault count, smallest first, in a fixed canonical
order, so the first breach reported is always the same one regardless of
how many worker processes share the work.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .evaluator import Evaluator, FaultScenario, ScenarioError, Valuation, enumerate_routings
from .model import Architecture
from .values import Value

__all__ = [
    "Leak",
    "FailSecureUpTo",
    "Breach",
    "Verdict",
    "is_secure",
    "scenarios",
    "scenario_count",
    "check_fail_secure",
    "all_breaches",
    "min_fault_count",
    "verify_counterexample",
]


@dataclass(frozen=True)
class Leak:
    output: str
    value: Value
    matched_input: str


@dataclass(frozen=True)
class FailSecureUpTo:
    n: int
    scenarios_checked: int


@dataclass(frozen=True)
class Breach:
    scenario: FaultScenario
    valuation: Valuation
    leaks: tuple[Leak, ...]
    # canonical count of scenarios up to and including this one
    scenarios_checked: int = field(default=0, compare=False)

    @property
    def faults(self) -> list[str]:
        return sorted(self.scenario.faulty)


Verdict = Union[FailSecureUpTo, Breach]


def is_secure(arch: Architecture, val: Valuation) -> tuple[bool, list[Leak]]:
    input_values = [
        (port, val[arch.driver_index[(None, port)]])
        for port in arch.inputs
        if (None, port) in arch.driver_index
    ]
    leaks = []
    for port in arch.outputs:
        net = arch.reader_index.get((None, port))
        if net is None:
            continue
        out = val[net]
        for src, v in input_values:
            if out == v:
                leaks.append(Leak(port, out, src))
                break
    return not leaks, leaks


def _instance_names(arch: Architecture) -> list[str]:
    return sorted(inst.name for inst in arch.instances)


def scenarios(arch: Architecture, k: int) -> Iterator[FaultScenario]:
    """All scenarios with exactly ``k`` failed instances, in canonical order.

    Fault sets come in lexicographic order of sorted instance names. Within
    a fault set, routings are combined with the alphabetically first
    instance varying slowest.
    """
    for combo in itertools.combinations(_instance_names(arch), k):
        per_instance = [enumerate_routings(arch.kind_of(name)) for name in combo]
        for choice in itertools.product(*per_instance):
            yield FaultScenario(
                frozenset(combo),
                {name: dict(r) for name, r in zip(combo, choice)},
            )


def scenario_count(arch: Architecture, k: int) -> int:
    total = 0
    for combo in itertools.combinations(_instance_names(arch), k):
        prod = 1
        for name in combo:
            kind = arch.kind_of(name)
            prod *= len(kind.inputs) ** len(kind.outputs)
        total += prod
    return total


def _scan(arch: Architecture, k: int, start: int, stop: int, find_all: bool) -> list[int]:
    """Indices in ``[start, stop)`` of the stage-``k`` stream that leak."""
    ev = Evaluator(arch)
    hits = []
    stream = itertools.islice(scenarios(arch, k), start, stop)
    for i, s in enumerate(stream, start):
        secure, _ = is_secure(arch, ev.evaluate(s, check=False))
        if not secure:
            hits.append(i)
            if not find_all:
                break
    return hits


class _Search:
    def __init__(self, arch: Architecture, jobs: int):
        self.arch = arch
        self.jobs = max(1, jobs)
        self.pool: Optional[ProcessPoolExecutor] = None

    def __enter__(self):
        if self.jobs > 1:
            self.pool = ProcessPoolExecutor(max_workers=self.jobs)
        return self

    def __exit__(self, *exc):
        if self.pool is not None:
            self.pool.shutdown()

    def stage(self, k: int, find_all: bool) -> tuple[int, list[int]]:
        total = scenario_count(self.arch, k)
        if self.pool is None:
            return total, _scan(self.arch, k, 0, total, find_all)
        size = max(1, math.ceil(total / self.jobs))
        futures = [
            self.pool.submit(_scan, self.arch, k, lo, min(lo + size, total), find_all)
            for lo in range(0, total, size)
        ]
        hits = sorted(i for f in futures for i in f.result())
        return total, hits if find_all else hits[:1]

    def breach_at(self, k: int, index: int, checked: int) -> Breach:
        s = next(itertools.islice(scenarios(self.arch, k), index, None))
        val = Evaluator(self.arch).evaluate(s)
        _, leaks = is_secure(self.arch, val)
        return Breach(s, val, tuple(leaks), checked)


def _clamp(arch: Architecture, n: int) -> int:
    if n < 0:
        raise ValueError("fault bound must be non-negative")
    return min(n, len(arch.instances))


def check_fail_secure(arch: Architecture, n: int, jobs: int = 1) -> Verdict:
    """Return the canonically first breach with at most ``n`` faults.

    If there is none the product is fail-secure up to ``n`` faults. A bound
    above the number of instances is clamped.
    """
    n = _clamp(arch, n)
    checked = 0
    with _Search(arch, jobs) as search:
        for k in range(n + 1):
            total, hits = search.stage(k, find_all=False)
            if hits:
                return search.breach_at(k, hits[0], checked + hits[0] + 1)
            checked += total
    return FailSecureUpTo(n, checked)


def all_breaches(arch: Architecture, n: int, jobs: int = 1) -> tuple[list[Breach], int]:
    """Every breach at the smallest breaching fault count ``k <= n``.

    Returns the breaches in canonical order (empty when fail-secure up to
    ``n``) and the number of scenarios examined.
    """
    n = _clamp(arch, n)
    checked = 0
    with _Search(arch, jobs) as search:
        for k in range(n + 1):
            total, hits = search.stage(k, find_all=True)
            checked += total
            if hits:
                return [search.breach_at(k, i, checked) for i in hits], checked
    return [], checked


def min_fault_count(arch: Architecture, bound: int, jobs: int = 1) -> Optional[int]:
    bound = _clamp(arch, bound)
    with _Search(arch, jobs) as search:
        for k in range(bound + 1):
            _, hits = search.stage(k, find_all=False)
            if hits:
                return k
    return None


def verify_counterexample(arch: Architecture, b: Breach) -> bool:
    """Re-run the breach scenario and confirm it reproduces exactly."""
    try:
        val = Evaluator(arch).evaluate(b.scenario)
    except (ScenarioError, KeyError, TypeError):
        return False
    if val != dict(b.valuation):
        return False
    _, leaks = is_secure(arch, val)
    return bool(leaks) and leaks == list(b.leaks)
