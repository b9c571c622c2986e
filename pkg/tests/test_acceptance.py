"""Acceptance gate: one test per criterion, summarised at the end of the run."""

import json
import re
import subprocess
import sys
import time

import pytest
from hypothesis import given, settings

from failsec.analyzer import (
    Breach,
    FailSecureUpTo,
    all_breaches,
    check_fail_secure,
    min_fault_count,
    scenarios,
    verify_counterexample,
)
from failsec.dsl import parse, pretty_print
from failsec.evaluator import Evaluator
import oracle
from helpers import CORPUS, load
from strategies import architectures

REDUNDANT = str(CORPUS / "redundant_enc.fsl")
RANDOM = settings(max_examples=500, deadline=None, derandomize=True)


def cli(*argv):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "failsec", *argv], capture_output=True, text=True)
    return proc, time.perf_counter() - t0


def strip_timing(text):
    return re.sub(r',"elapsed_ms":\d+', "", text)


@pytest.mark.criterion(1, "fail-secure to one fault, 7 scenarios, exit 0, < 1 s")
def test_fail_secure_to_one_fault():
    proc, elapsed = cli("check", REDUNDANT, "--max-faults", "1", "--format", "json")
    obj = json.loads(proc.stdout)
    assert proc.returncode == 0
    assert obj["verdict"] == "fail-secure" and obj["max_faults"] == 1
    assert obj["scenarios_checked"] == 7 == oracle.summarize(load("redundant_enc.fsl"), 1)[1]
    assert check_fail_secure(load("redundant_enc.fsl"), 1) == FailSecureUpTo(1, 7)
    assert elapsed < 1.0


@pytest.mark.criterion(2, "breach at two faults via comparator and encryptor, exit 1, < 1 s")
def test_breach_at_two_faults():
    arch = load("redundant_enc.fsl")
    proc, elapsed = cli("check", REDUNDANT, "--max-faults", "2", "--format", "json")
    obj = json.loads(proc.stdout)
    assert proc.returncode == 1 and elapsed < 1.0
    assert obj["verdict"] == "breach"

    faults = obj["faults"]
    kinds = sorted(arch.instance_map[f].kind for f in faults)
    assert kinds == ["Comparator", "Encryptor"]
    cmp_name = next(f for f in faults if arch.instance_map[f].kind == "Comparator")
    enc_name = next(f for f in faults if arch.instance_map[f].kind == "Encryptor")
    routed_port = obj["routing"][cmp_name]["out"]
    feeding = arch.nets[arch.reader_index[(cmp_name, routed_port)]]
    assert feeding.driver.instance == enc_name

    leak, = obj["leaks"]
    assert leak["output"] == "out"
    assert leak["value"] == obj["routing"][enc_name]["out"] in ("key", "msg")

    b = check_fail_secure(arch, 2)
    assert isinstance(b, Breach) and verify_counterexample(arch, b)

    proc, elapsed = cli("check", REDUNDANT, "--max-faults", "2", "--all", "--format", "json")
    every = json.loads(proc.stdout)["all_breaches"]
    assert proc.returncode == 1 and elapsed < 1.0
    assert any(lk["value"] == "key" for br in every for lk in br["leaks"])


@pytest.mark.criterion(3, "min-faults with bound 3 prints 2")
def test_min_faults():
    proc, _ = cli("min-faults", REDUNDANT, "--bound", "3")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "2"


CORPUS_FILES = sorted(p.name for p in CORPUS.glob("*.fsl"))


@pytest.mark.criterion(4, "corpus agrees exactly with the naive enumerator, < 30 s")
def test_oracle_equivalence():
    t0 = time.perf_counter()
    archs = {name: load(name) for name in CORPUS_FILES}
    assert len(archs) >= 10
    assert all(len(a.instances) <= 4 for a in archs.values())
    assert {"single_enc.fsl", "wire.fsl", "chain.fsl", "fan_in.fsl"} <= set(archs)
    for name, arch in archs.items():
        m = len(arch.instances)
        for n in range(m + 1):
            want = oracle.summarize(arch, n)
            got = check_fail_secure(arch, n)
            if want[0] == "fail-secure":
                assert got == FailSecureUpTo(n, want[1]), (name, n)
            else:
                _, faulty, routing, leaks, position = want
                assert isinstance(got, Breach), (name, n)
                assert got.scenario.faulty == faulty, (name, n)
                assert dict(got.scenario.routing) == routing, (name, n)
                assert [(lk.output, lk.matched_input) for lk in got.leaks] == leaks, (name, n)
                assert got.scenarios_checked == position, (name, n)
        for bound in range(m + 1):
            assert min_fault_count(arch, bound) == oracle.min_faults(arch, bound), (name, bound)
    assert time.perf_counter() - t0 < 30


@pytest.mark.criterion(5, "every breach re-validates (corpus and 500 random architectures)")
def test_counterexamples_validate():
    for name in CORPUS_FILES:
        arch = load(name)
        for n in range(len(arch.instances) + 1):
            for b in all_breaches(arch, n)[0]:
                assert verify_counterexample(arch, b), name
    _random_breaches_validate()


@RANDOM
@given(architectures(max_instances=6))
def _random_breaches_validate(arch):
    for n in range(len(arch.instances) + 1):
        v = check_fail_secure(arch, n)
        if isinstance(v, Breach):
            assert verify_counterexample(arch, v)
            for b in all_breaches(arch, n)[0]:
                assert verify_counterexample(arch, b)
            return


@pytest.mark.criterion(6, "parse(pretty_print(a)) == a for 500 random architectures, fixed point")
@RANDOM
@given(architectures(max_instances=6))
def test_parser_round_trip(arch):
    text = pretty_print(arch)
    assert parse(text) == arch
    assert pretty_print(parse(text)) == text


@pytest.mark.criterion(7, "faulty outputs always carry one of the instance's inputs")
@RANDOM
@given(architectures(max_instances=6))
def test_failure_semantics(arch):
    ev = Evaluator(arch)
    for k in range(min(2, len(arch.instances)) + 1):
        for s in scenarios(arch, k):
            val = ev.evaluate(s)
            for name in s.faulty:
                kind = arch.kind_of(name)
                inputs = {val[arch.reader_index[(name, p)]] for p in kind.inputs}
                for port in kind.outputs:
                    net = arch.driver_index.get((name, port))
                    if net is not None:
                        assert val[net] in inputs


@pytest.mark.criterion(8, "JSON is byte-identical for 1 and several workers")
def test_determinism():
    reports = []
    for jobs in ("1", "2", "4"):
        for extra in ((), ("--all",)):
            proc, _ = cli("check", REDUNDANT, "--max-faults", "2", "--format", "json", "--jobs", jobs, *extra)
            assert proc.returncode == 1
            reports.append((extra, strip_timing(proc.stdout)))
    for extra in ((), ("--all",)):
        texts = {text for e, text in reports if e == extra}
        assert len(texts) == 1


def layered_dag(layers=6, width=2):
    """``layers`` x ``width`` two-input encryptors; every path is ``layers`` long."""
    lines = ["component Mix {", "  inputs: a, b;", "  outputs: out;", "  out := enc(a, b);", "}", "",
             "product Layered {", "  inputs: key, msg;", "  outputs: out;"]
    names = [[f"m{i}_{j}" for j in range(width)] for i in range(layers)]
    lines += [f"  use {n}: Mix;" for row in names for n in row]
    lines.append(f"  connect key -> {', '.join(n + '.a' for n in names[0])};")
    lines.append(f"  connect msg -> {', '.join(n + '.b' for n in names[0])};")
    for prev, row in zip(names, names[1:]):
        lines.append(f"  connect {prev[0]}.out -> {', '.join(n + '.a' for n in row)};")
        lines.append(f"  connect {prev[1]}.out -> {', '.join(n + '.b' for n in row)};")
    lines.append(f"  connect {names[-1][0]}.out -> out;")
    lines.append("}")
    return "\n".join(lines) + "\n"


@pytest.mark.criterion(9, "12-instance DAG at max-faults 3 in < 10 s")
def test_desk_scale(tmp_path):
    path = tmp_path / "layered.fsl"
    path.write_text(layered_dag())
    assert len(parse(path.read_text()).instances) == 12
    proc, elapsed = cli("check", str(path), "--max-faults", "3", "--format", "json")
    obj = json.loads(proc.stdout)
    assert proc.returncode == 0, proc.stderr
    # sum of C(12, k) * 2**k for k <= 3
    assert obj["scenarios_checked"] == 1 + 24 + 264 + 1760
    assert elapsed < 10
