"""Command-line front end: ``tpcheck analyze|recheck|check-refinement|metrics|stress-proof``."""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from tpcheck.errors import ModelError, ParseError, PreconditionError, ResourceLimitExceeded
from tpcheck.ltl import parse_properties, tau_transform
from tpcheck.pks import load_pks, model_size, parse_pks, refinement_violations, require_valid
from tpcheck.proof import (
    Approximations,
    analyze,
    encode_check,
    load_proof,
    omega_related_mutants,
    parse_proof,
    proof_size,
    recheck,
    serialize_counterexample,
    serialize_proof,
    unknown_labels_first,
    verdict,
)
from tpcheck.sat import DEFAULT_NODE_LIMIT, property_automaton
from tpcheck.snf import dump_clauses
from tpcheck.tri import Tri
from tpcheck.uc import extract_uc

EXIT_OK, EXIT_VIOLATED, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3


@dataclass
class RunRecord:
    name: str
    verdict: Tri | None
    ce_file: str | None = None
    proof_file: str | None = None
    proof_size: int | None = None
    seconds: float = 0.0
    error: str | None = None


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(out_dir, filename, text):
    path = os.path.join(out_dir, filename)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _analyze_one(job):
    m, name, phi, out_dir, flags = job
    start = time.perf_counter()
    rec = RunRecord(name, None)
    try:
        res = analyze(m, phi, name, node_limit=flags["node_limit"])
        rec.verdict = res.verdict
        if res.counterexample is not None:
            rec.ce_file = _write(out_dir, f"{name}.ce", serialize_counterexample(name, res.counterexample))
        if res.proof is not None:
            rec.proof_file = _write(out_dir, f"{name}.proof", serialize_proof(res.proof))
            rec.proof_size = proof_size(res.proof)
        if flags["dump_automaton"]:
            _write(out_dir, f"{name}.aut", property_automaton(phi).dump())
        if flags["dump_snf"] or flags["dump_uc"]:
            ap = Approximations.of(m)
            a = ap.high if res.verdict is Tri.TRUE else ap.low
            clauses = encode_check(a, tau_transform(phi))
            if flags["dump_snf"]:
                _write(out_dir, f"{name}.snf", dump_clauses(clauses))
            if flags["dump_uc"] and res.proof is not None:
                core = extract_uc(clauses, unknown_labels_first(m), node_limit=flags["node_limit"])
                _write(out_dir, f"{name}.uc", dump_clauses(core.clauses))
    except (ResourceLimitExceeded, PreconditionError) as e:
        rec.error = str(e)
    rec.seconds = time.perf_counter() - start
    return rec


def cmd_analyze(args) -> int:
    m = load_pks(args.model)
    require_valid(m)
    props = parse_properties(_read(args.properties))
    os.makedirs(args.out_dir, exist_ok=True)
    flags = {
        "node_limit": args.node_limit,
        "dump_snf": args.dump_snf,
        "dump_uc": args.dump_uc,
        "dump_automaton": args.dump_automaton,
    }
    jobs = [(m, name, phi, args.out_dir, flags) for name, phi in props]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(_analyze_one, jobs))
    else:
        records = [_analyze_one(j) for j in jobs]

    header = f"{'property':<16} verdict  proof-size  artifacts"
    print(f"model {m.name}  size {model_size(m)}")
    print(header)
    for r in records:
        if r.error:
            print(f"{r.name:<16} ERROR    -           {r.error}")
            continue
        files = " ".join(os.path.basename(f) for f in (r.ce_file, r.proof_file) if f)
        size = "-" if r.proof_size is None else str(r.proof_size)
        line = f"{r.name:<16} {r.verdict.symbol:<8} {size:<11} {files}".rstrip()
        if args.timing:
            line += f"  ({r.seconds:.3f}s)"
        print(line)
    if any(r.error for r in records):
        return EXIT_ERROR
    found = {r.verdict for r in records}
    if Tri.FALSE in found:
        return EXIT_VIOLATED
    if Tri.UNKNOWN in found:
        return EXIT_UNKNOWN
    return EXIT_OK


def cmd_recheck(args) -> int:
    m2 = load_pks(args.model)
    ok = True
    for path in args.proofs:
        omega = load_proof(path)
        res = recheck(omega, m2)
        if res.passed:
            print(f"{omega.property}: PASS")
        else:
            ok = False
            print(f"{omega.property}: FAIL")
            for v in res.violations:
                print(f"  {v}")
    return EXIT_OK if ok else EXIT_VIOLATED


def cmd_check_refinement(args) -> int:
    a, b = load_pks(args.model_a), load_pks(args.model_b)
    problems = refinement_violations(a, b)
    if problems:
        print(f"not a refinement: {problems[0]}")
        return EXIT_VIOLATED
    print(f"{b.name} refines {a.name}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    for path in args.files:
        text = _read(path)
        first = next((l.split()[0] for l in text.splitlines() if l.split("#", 1)[0].strip()), "")
        if first == "proof":
            omega = parse_proof(text)
            print(f"{path}: proof {omega.property} size {proof_size(omega)}")
        else:
            m = parse_pks(text)
            print(f"{path}: model {m.name} size {model_size(m)}")
    return EXIT_OK


def cmd_stress_proof(args) -> int:
    m = load_pks(args.model)
    require_valid(m)
    omega = load_proof(args.proof)
    props = dict(parse_properties(_read(args.properties)))
    if omega.property not in props:
        raise PreconditionError(f"property {omega.property} is not in {args.properties}")
    phi = props[omega.property]
    bad = 0
    for i, mut in enumerate(omega_related_mutants(m, omega, args.mutants, args.seed)):
        if not recheck(omega, mut).passed:
            print(f"mutant {i}: generator broke the proof")
            bad += 1
            continue
        v = verdict(mut, phi, args.node_limit)
        if v < omega.level:
            print(f"mutant {i}: verdict {v.symbol} below {omega.level.symbol}")
            bad += 1
    print(f"{omega.property}: {args.mutants} mutants, {bad} violations")
    return EXIT_OK if bad == 0 else EXIT_VIOLATED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tpcheck", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="verdicts, counterexamples and proofs for a property file")
    a.add_argument("model")
    a.add_argument("properties")
    a.add_argument("-o", "--out-dir", default=".")
    a.add_argument("--dump-snf", action="store_true")
    a.add_argument("--dump-uc", action="store_true")
    a.add_argument("--dump-automaton", action="store_true")
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--timing", action="store_true", help="append wall time per property")
    a.add_argument("--node-limit", type=int, default=DEFAULT_NODE_LIMIT)
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("recheck", help="check a revised model against stored proofs")
    r.add_argument("proofs", nargs="+")
    r.add_argument("model")
    r.set_defaults(func=cmd_recheck)

    c = sub.add_parser("check-refinement", help="is MODEL_B a refinement of MODEL_A")
    c.add_argument("model_a")
    c.add_argument("model_b")
    c.set_defaults(func=cmd_check_refinement)

    mt = sub.add_parser("metrics", help="size of models and proofs")
    mt.add_argument("files", nargs="+")
    mt.set_defaults(func=cmd_metrics)

    s = sub.add_parser("stress-proof", help="re-analyze random revisions that keep a proof")
    s.add_argument("proof")
    s.add_argument("model")
    s.add_argument("properties")
    s.add_argument("--mutants", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--node-limit", type=int, default=DEFAULT_NODE_LIMIT)
    s.set_defaults(func=cmd_stress_proof)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ModelError, PreconditionError, ResourceLimitExceeded, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        if isinstance(e, ModelError):
            for d in e.diagnostics[1:]:
                print(f"  {d}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
