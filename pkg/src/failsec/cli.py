"""``failsec`` command line.

Exit codes: 0 fail-secure / valid / verified, 1 breach found or replay
mismatch, 2 usage, I/O, parse or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Optional, Sequence, TextIO

from . import __version__
from .analyzer import (
    Breach,
    FailSecureUpTo,
    all_breaches,
    check_fail_secure,
    min_fault_count,
    verify_counterexample,
)
from .dsl import ParseError, parse
from .model import Architecture, has_errors, validate
from .report import TOOL, Report, breach_from_json, emit_dot, emit_json, emit_text, use_color

EXIT_OK = 0
EXIT_BREACH = 1
EXIT_ERROR = 2


class _Failed(Exception):
    """Raised after a diagnostic has been written; carries no message."""


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=TOOL, description="Bounded fail-secure analysis of .fsl architectures.")
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="parse and validate an architecture")
    v.add_argument("file")
    v.add_argument("--format", choices=("text", "dot"), default="text")

    c = sub.add_parser("check", help="search for breaches with up to N failed components")
    c.add_argument("file")
    c.add_argument("--max-faults", type=int, default=1, metavar="N")
    c.add_argument("--format", choices=("text", "json", "dot"), default="text")
    c.add_argument("--all", action="store_true", help="list every breach at the smallest breaching fault count")
    c.add_argument("--jobs", type=int, default=1, metavar="J")

    m = sub.add_parser("min-faults", help="smallest number of failures that can leak an input")
    m.add_argument("file")
    m.add_argument("--bound", type=int, default=None, metavar="B")
    m.add_argument("--format", choices=("text", "json"), default="text")
    m.add_argument("--jobs", type=int, default=1, metavar="J")

    r = sub.add_parser("replay", help="re-check a breach from a JSON report")
    r.add_argument("file")
    r.add_argument("--breach", required=True, metavar="BREACH_JSON")
    return p


def _load(path: str, err: TextIO) -> Architecture:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as exc:
        print(f"{TOOL}: error: cannot read {path}: {exc}", file=err)
        raise _Failed
    try:
        arch = parse(text)
    except ParseError as exc:
        print(f"{path}:{exc}", file=err)
        raise _Failed
    diags = validate(arch)
    for d in diags:
        print(f"{path}:{d}", file=err)
    if has_errors(diags):
        raise _Failed
    return arch


def _elapsed_ms(t0: float) -> int:
    return int(round((time.perf_counter() - t0) * 1000))


def _cmd_validate(args, out: TextIO, err: TextIO) -> int:
    arch = _load(args.file, err)
    if args.format == "dot":
        out.write(emit_dot(arch))
    else:
        out.write(
            f"OK: {arch.name} ({len(arch.kinds)} components, "
            f"{len(arch.instances)} instances, {len(arch.nets)} nets)\n"
        )
    return EXIT_OK


def _cmd_check(args, out: TextIO, err: TextIO) -> int:
    if args.max_faults < 0 or args.jobs < 1:
        print(f"{TOOL}: error: --max-faults must be >= 0 and --jobs >= 1", file=err)
        return EXIT_ERROR
    arch = _load(args.file, err)
    t0 = time.perf_counter()
    if args.all:
        breaches, checked = all_breaches(arch, args.max_faults, jobs=args.jobs)
        if breaches:
            verdict, listing = breaches[0], breaches
        else:
            verdict, listing = FailSecureUpTo(min(args.max_faults, len(arch.instances)), checked), []
    else:
        verdict = check_fail_secure(arch, args.max_faults, jobs=args.jobs)
        checked, listing = verdict.scenarios_checked, None
    report = Report(
        file=args.file,
        verdict=verdict,
        max_faults=args.max_faults,
        elapsed_ms=_elapsed_ms(t0),
        scenarios_checked=checked,
        arch=arch,
        all_breaches=listing,
    )
    if args.format == "json":
        out.write(emit_json(report) + "\n")
    elif args.format == "dot":
        out.write(emit_dot(arch, verdict))
    else:
        out.write(emit_text(report, color=use_color(out)))
    return EXIT_BREACH if isinstance(verdict, Breach) else EXIT_OK


def _cmd_min_faults(args, out: TextIO, err: TextIO) -> int:
    arch = _load(args.file, err)
    bound = len(arch.instances) if args.bound is None else args.bound
    if bound < 0 or args.jobs < 1:
        print(f"{TOOL}: error: --bound must be >= 0 and --jobs >= 1", file=err)
        return EXIT_ERROR
    t0 = time.perf_counter()
    k = min_fault_count(arch, bound, jobs=args.jobs)
    if args.format == "json":
        obj = {
            "tool": TOOL,
            "version": __version__,
            "file": args.file,
            "bound": bound,
            "min_faults": k,
            "elapsed_ms": _elapsed_ms(t0),
        }
        out.write(json.dumps(obj, separators=(",", ":")) + "\n")
    else:
        out.write(("none" if k is None else str(k)) + "\n")
    return EXIT_OK


def _cmd_replay(args, out: TextIO, err: TextIO) -> int:
    arch = _load(args.file, err)
    try:
        with open(args.breach, encoding="utf-8") as f:
            breach = breach_from_json(f.read(), arch)
    except OSError as exc:
        print(f"{TOOL}: error: cannot read {args.breach}: {exc}", file=err)
        return EXIT_ERROR
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        print(f"{TOOL}: error: malformed breach report {args.breach}: {exc}", file=err)
        return EXIT_ERROR
    if verify_counterexample(arch, breach):
        out.write(f"verified: breach with faults {', '.join(breach.faults) or '(none)'} reproduces\n")
        return EXIT_OK
    out.write("NOT verified: the breach does not reproduce on this architecture\n")
    return EXIT_BREACH


_COMMANDS = {
    "validate": _cmd_validate,
    "check": _cmd_check,
    "min-faults": _cmd_min_faults,
    "replay": _cmd_replay,
}


def run(argv: Sequence[str], stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    parser = _parser()
    try:
        # argparse writes usage errors to sys.stderr
        saved = sys.stdout, sys.stderr
        sys.stdout, sys.stderr = out, err
        try:
            args = parser.parse_args(list(argv))
        finally:
            sys.stdout, sys.stderr = saved
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return _COMMANDS[args.command](args, out, err)
    except _Failed:
        return EXIT_ERROR


def main() -> None:
    sys.exit(run(sys.argv[1:]))
