"""Design-time fail-secure analysis of component architectures."""

__version__ = "0.1.0"

from .analyzer import (  # noqa: E402
    Breach,
    FailSecureUpTo,
    Leak,
    all_breaches,
    check_fail_secure,
    is_secure,
    min_fault_count,
    scenario_count,
    scenarios,
    verify_counterexample,
)
from .dsl import ParseError, parse, pretty_print  # noqa: E402
from .evaluator import FaultScenario, enumerate_routings, eval_expr, evaluate  # noqa: E402
from .model import Architecture, dataflow_order, validate  # noqa: E402
from .values import NULL, Atom, Term, atoms_of, equals, render  # noqa: E402
