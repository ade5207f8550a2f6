"""Command-line front end.

Exit codes: 0 affirmative or success, 1 negative or refuted, 2 input error,
3 inconclusive (a bounded search ran out without an answer).
"""
from __future__ import annotations

import argparse
import sys

from . import corpus
from .algebraize import algebraize, dealgebraize, from_annotated
from .construct import METHODS, amalgamate
from .dsl import load_theory
from .errors import (
    AmalgamError, ArityMismatch, BudgetExceeded, CorpusFileMissing, DslSyntaxError,
    StructureError, UnknownSymbol,
)
from .fraisse import STRATEGIES, GrowthSchedule, extension_check, grow_chain
from .io import dump_json, load_structure, load_triple, structure_to_json, triple_to_json
from .logic import satisfies
from .search import (
    EXHAUSTED, NO_UP_TO_BOUND, WITNESS, SearchBudget, decide_bounded, decide_into_union,
    decide_jep, enumerate_structures, search_counterexample,
)
from .structures import validate_tba

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3
INPUT_ERRORS = (StructureError, UnknownSymbol, ArityMismatch, DslSyntaxError, CorpusFileMissing,
                OSError, ValueError)
PROPERTIES = ("sapu", "apu", "sap", "ap", "jep", "djep", "jepu", "djepu")


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _triple(args):
    if args.triple:
        return load_triple(args.triple)
    if not (args.a and args.b and args.c):
        raise ValueError("give --triple or all of --a, --b and --c")
    return validate_tba(load_structure(args.a), load_structure(args.b), load_structure(args.c))


def cmd_check(args):
    th = load_theory(args.theory)
    if not args.a:
        print(f"parsed theory {th.name or '(unnamed)'}: {len(th.axioms)} axioms")
        return EXIT_OK
    verdict = satisfies(load_structure(args.a), th)
    if verdict:
        print("model")
        return EXIT_OK
    print(f"not a model: {verdict.axiom} fails at {verdict.witness}")
    return EXIT_NO


def cmd_amalgamate(args):
    th = load_theory(args.theory)
    res = amalgamate(_triple(args), th, args.method)
    report = {"method": res.method, "amalgam": structure_to_json(res.d),
              "super_witness_relations": sorted(res.super_witness_relations)}
    _emit(dump_json(report), args.out)
    return EXIT_OK


def cmd_decide(args):
    th = load_theory(args.theory)
    budget = SearchBudget(max_extra_elements=args.extra, max_candidates=args.max_candidates)
    prop = args.property
    if prop in ("jep", "djep", "jepu", "djepu"):
        a, b = load_structure(args.a), load_structure(args.b)
        dec = decide_jep(a, b, th, prop.upper(), budget=budget, workers=args.workers)
    elif prop in ("sapu", "apu"):
        dec = decide_into_union(_triple(args), th, strong=prop == "sapu", workers=args.workers,
                                budget=budget if args.max_candidates else None)
    else:
        dec = decide_bounded(_triple(args), th, strong=prop == "sap", budget=budget,
                             workers=args.workers)
    _emit(dump_json(dec.to_json()), args.out)
    print(str(dec), file=sys.stderr)
    return {WITNESS: EXIT_OK, EXHAUSTED: EXIT_NO, NO_UP_TO_BOUND: EXIT_INCONCLUSIVE}[dec.verdict]


def cmd_search(args):
    th = load_theory(args.theory)
    got = search_counterexample(th, args.max_c, args.max_side,
                                SearchBudget(max_extra_elements=args.extra), workers=args.workers)
    if got is None:
        _emit(dump_json({"counterexample": None}), args.out)
        return EXIT_INCONCLUSIVE
    t, dec = got
    _emit(dump_json({"counterexample": triple_to_json(t), "decision": dec.to_json()}), args.out)
    return EXIT_NO


def cmd_algebraize(args):
    s = load_structure(args.a)
    if args.reverse:
        out = dealgebraize(from_annotated(s))
    else:
        out = algebraize(s).base
    _emit(dump_json(structure_to_json(out)), args.out)
    return EXIT_OK


def cmd_fraisse(args):
    th = load_theory(args.theory)
    if args.a:
        start = load_structure(args.a)
    else:
        start = next(iter(enumerate_structures(th.signature, 1, th, ["v"])), None)
        if start is None:
            raise ValueError("the theory has no one-element model; give --a")
    sched = GrowthSchedule(args.steps, args.seed, args.strategy, args.max_k)
    m = grow_chain(start, th, sched)
    report = extension_check(m, th, args.check_k)
    _emit(dump_json({"structure": structure_to_json(m), "audit": report.to_json()}), args.out)
    return EXIT_OK if report.fraction == 1 else EXIT_NO


def cmd_corpus(args):
    report = corpus.run_corpus(args.filter, args.manifest, args.workers)
    _emit(report.text(), args.out)
    return EXIT_OK if report.ok else EXIT_NO


def build_parser():
    p = argparse.ArgumentParser(prog="amalgam",
                                description="Amalgamation properties of finite structures.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, triple=True):
        sp.add_argument("--theory", required=True, help="theory file in the DSL")
        if triple:
            sp.add_argument("--a", help="structure JSON")
            sp.add_argument("--b", help="structure JSON")
            sp.add_argument("--c", help="structure JSON (the common substructure)")
            sp.add_argument("--triple", help="one JSON file with keys a, b, c")
        sp.add_argument("--out", help="write the result here instead of stdout")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("check", help="parse a theory and optionally model-check a structure")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("amalgamate", help="build an amalgam on A | B")
    common(sp)
    sp.add_argument("--method", choices=METHODS, default="auto")
    sp.set_defaults(func=cmd_amalgamate)

    sp = sub.add_parser("decide", help="decide an amalgamation or joint embedding property")
    common(sp)
    sp.add_argument("--property", choices=PROPERTIES, required=True)
    sp.add_argument("--extra", type=int, default=None, help="extra elements for ap/sap/jep/djep")
    sp.add_argument("--max-candidates", type=int, default=None)
    sp.set_defaults(func=cmd_decide)

    sp = sub.add_parser("search", help="hunt for an AP counterexample among small triples")
    common(sp, triple=False)
    sp.add_argument("--max-c", type=int, default=2)
    sp.add_argument("--max-side", type=int, default=3)
    sp.add_argument("--extra", type=int, default=2)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("algebraize", help="replace relations by selection operations")
    sp.add_argument("--a", required=True, help="structure JSON")
    sp.add_argument("--reverse", action="store_true", help="undo a previous algebraize")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_algebraize)

    sp = sub.add_parser("fraisse", help="grow an amalgamation chain and audit it")
    common(sp, triple=False)
    sp.add_argument("--a", help="starting structure (default: first one-element model)")
    sp.add_argument("--steps", type=int, default=20)
    sp.add_argument("--strategy", choices=STRATEGIES, default="round-robin")
    sp.add_argument("--max-k", type=int, default=2)
    sp.add_argument("--check-k", type=int, default=1)
    sp.set_defaults(func=cmd_fraisse)

    sp = sub.add_parser("corpus", help="run the bundled examples")
    csub = sp.add_subparsers(dest="action", required=True)
    run = csub.add_parser("run")
    run.add_argument("--filter", help="substring or glob on entry names")
    run.add_argument("--manifest", help="alternative manifest file")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out")
    run.set_defaults(func=cmd_corpus)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AmalgamError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NO


if __name__ == "__main__":
    sys.exit(main())
