"""Command-line surface: each subcommand prints one deterministic report.

Exit codes: 0 = computed (including negative results, which are data);
2 = usage, parse, or precondition error; 3 = a work budget was exceeded.
"""

from __future__ import annotations

import argparse
import sys

from . import decompose as dec
from .core import Universe
from .errors import BudgetExceededError, ConstructionBugError, ToolkitError
from .evaluate import eval_formula
from .families import parse_family_spec
from .formulas import format_formula, parse_formula
from .interpret import (check_definable, check_expressibility,
                        check_interpretation, compose_interpretations,
                        search_interpretation)
from .invariants import lambda0, lambda0_prime, lambda1
from .report import Report, digest_text, write_report
from .relfile import read_relation_file


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="finiteq",
        description="invariants, decompositions and interpretability checks "
                    "for relations over finite universes")
    top.add_argument("--format", choices=("json", "text"), default="json",
                     help="report output format")
    sub = top.add_subparsers(dest="cmd", required=True)

    def with_file(p, required=True):
        p.add_argument("file", nargs=None if required else "?",
                       help="relation file (see docs for the line format)")

    p = sub.add_parser("invariants", help="support and type invariants of a relation")
    with_file(p)
    p.add_argument("--rel", required=True, help="relation name in the file")

    p = sub.add_parser("decompose", help="monadic or injective core of a relation")
    with_file(p)
    p.add_argument("--rel", required=True)
    p.add_argument("--kind", choices=("mon", "inj"), required=True)

    p = sub.add_parser("extract-mon",
                       help="define a set of exactly lambda0(R) elements from copies of R")
    with_file(p)
    p.add_argument("--rel", required=True)

    p = sub.add_parser("encode", help="encode a relation as unary function chains")
    with_file(p)
    p.add_argument("--rel", required=True)
    p.add_argument("--set", required=True,
                   help="comma-separated element list containing the relation's domain")

    p = sub.add_parser("eval", help="evaluate a sentence over the file's structures")
    with_file(p)
    p.add_argument("--phi", required=True, help="formula text, or @path to a file")
    p.add_argument("--max-family", type=int, default=200000)

    p = sub.add_parser("check-def", help="does the formula define exactly the family?")
    with_file(p, required=False)
    p.add_argument("--universe", type=int, help="universe size if no file is given")
    p.add_argument("--family", required=True, help="family specifier, e.g. mon:2")
    p.add_argument("--phi", required=True)
    p.add_argument("--max-family", type=int, default=1 << 17)

    for name, helptext in (("check-interp",
                            "check one first-order interpretation formula"),
                           ("check-exp",
                            "check an expressibility formula (second-order allowed)")):
        p = sub.add_parser(name, help=helptext)
        with_file(p, required=False)
        p.add_argument("--universe", type=int)
        p.add_argument("--phi", required=True)
        p.add_argument("--k1", required=True)
        p.add_argument("--k2", required=True, action="append", default=None,
                       help="target family; repeat for one family per relation slot")
        p.add_argument("--param", action="append", default=[],
                       help="fixed relation name from the file, usable in phi")
        p.add_argument("--max-work", type=int, default=50_000_000)

    p = sub.add_parser("search-interp", help="search for an interpreting formula")
    with_file(p, required=False)
    p.add_argument("--universe", type=int)
    p.add_argument("--k1", required=True)
    p.add_argument("--k2", required=True)
    p.add_argument("--max-m", type=int, default=2)
    p.add_argument("--max-size", type=int, default=5)
    p.add_argument("--max-depth", type=int, default=1)
    p.add_argument("--max-work", type=int, default=50_000_000)

    p = sub.add_parser("compose",
                       help="compose two interpretations through a shared middle family")
    with_file(p, required=False)
    p.add_argument("--universe", type=int)
    p.add_argument("--phi12", required=True)
    p.add_argument("--phi23", required=True)
    p.add_argument("--k1", required=True)
    p.add_argument("--k2", required=True)
    p.add_argument("--k3", required=True)
    p.add_argument("--max-work", type=int, default=50_000_000)

    p = sub.add_parser("family", help="count or list a quantifier family")
    with_file(p, required=False)
    p.add_argument("--universe", type=int)
    p.add_argument("spec", help="family specifier, e.g. mon:2 or eq:<=2")
    p.add_argument("--list", action="store_true",
                   help="list the members (subject to --max-family)")
    p.add_argument("--max-family", type=int, default=200000)
    return top


def _load(args):
    """The (relation file or None, universe) pair for a subcommand."""
    rf = None
    if getattr(args, "file", None):
        rf = read_relation_file(args.file)
    if rf is not None:
        return rf, rf.universe
    size = getattr(args, "universe", None)
    if size is None:
        raise ToolkitError("either a relation file or --universe is required")
    return None, Universe(size)


def _formula(text, env):
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    return parse_formula(text, env)


def _named_relation(rf, name):
    if rf is None or name not in rf.relations:
        raise ToolkitError(f"no relation named {name!r} in the input file")
    return rf.relations[name]


def _inputs(args, rf):
    out = {"args": {k: v for k, v in sorted(vars(args).items())
                    if k not in ("cmd", "format") and v is not None}}
    if getattr(args, "file", None):
        with open(args.file, encoding="utf-8") as fh:
            out["file_sha256"] = digest_text(fh.read())
    if rf is not None and rf.warnings:
        out["file_warnings"] = list(rf.warnings)
    return out


def _witness_dict(w):
    return {"set": sorted(w.a_set), "value": w.value}


def _certificate_dict(cert):
    return {
        "formula": format_formula(cert.phi),
        "k1": cert.k1_spec,
        "k2": list(cert.k2_specs),
        "slots": list(cert.slots),
        "relation_variables": list(cert.rel_vars),
        "params": dict(cert.params),
        "witnesses": [{"member": member, "witnesses": list(ws)}
                      for member, ws in cert.witnesses],
    }


def _interp_result_dict(result):
    out = {"ok": result.ok}
    if result.ok:
        out["certificate"] = _certificate_dict(result.certificate)
    else:
        out["counterexample"] = sorted(map(list, result.counterexample.sorted_tuples()))
    return out


def _run(args) -> Report:
    rf, universe = _load(args)
    report = Report(command=args.cmd, inputs=_inputs(args, rf))
    res = report.results
    env = rf.env() if rf is not None else {}

    if args.cmd == "invariants":
        rel = _named_relation(rf, args.rel)
        w0 = lambda0_prime(rel)
        w1 = lambda1(rel)
        res["lambda0_prime"] = _witness_dict(w0)
        res["lambda0"] = lambda0(rel)
        res["lambda1"] = _witness_dict(w1)
        if w0.note:
            report.warnings.append(w0.note)

    elif args.cmd == "decompose":
        rel = _named_relation(rf, args.rel)
        if args.kind == "mon":
            core = dec.monadic_core(rel)
            res["a_set"] = sorted(core.a_set)
            res["d_params"] = list(core.d_params)
            res["r1"] = core.r1
            res["domain_size"] = len(core.r1.domain())
            res["domain_bound"] = lambda0_prime(rel).value + rel.arity
        else:
            core = dec.inj_decompose(rel)
            res["a_set"] = sorted(core.a_set)
            res["c_bar"] = [sorted(c) for c in core.c_bar]
            res["a1_set"] = sorted(core.a1_set)
            res["e_ac"] = core.e_ac
            res["r1"] = core.r1
            res["domain_size"] = len(core.r1.domain())
            res["domain_bound"] = rel.arity ** 2 * lambda1(rel).value
        res["verified"] = True  # the constructors verify the round trip

    elif args.cmd == "extract-mon":
        rel = _named_relation(rf, args.rel)
        cert = dec.monadic_extraction(rel)
        res["b_set"] = sorted(cert.b_set)
        res["lambda0"] = lambda0(rel)
        res["formula"] = cert.formula
        res["copies"] = [list(s) for s in cert.sigmas]
        res["elements"] = list(cert.elems)
        res["cases"] = list(cert.trail)

    elif args.cmd == "encode":
        rel = _named_relation(rf, args.rel)
        a_set = frozenset(int(x) for x in args.set.split(","))
        enc = dec.encode_nary(rel, a_set)
        res["carriers"] = list(enc.carriers)
        res["functions"] = list(enc.functions)
        res["formula"] = enc.formula

    elif args.cmd == "eval":
        phi = _formula(args.phi, env)
        res["value"] = eval_formula(phi, universe, env,
                                    max_family=args.max_family)
        report.budgets["max_family"] = args.max_family

    elif args.cmd == "check-def":
        family = parse_family_spec(args.family, env)
        phi = _formula(args.phi, env)
        ok, counterexample = check_definable(family, phi, universe,
                                             max_relations=args.max_family)
        res["defines"] = ok
        if counterexample is not None:
            res["counterexample"] = counterexample
        report.budgets["max_family"] = args.max_family

    elif args.cmd in ("check-interp", "check-exp"):
        phi = _formula(args.phi, env)
        k1 = parse_family_spec(args.k1, env)
        k2 = [parse_family_spec(s, env) for s in args.k2]
        params = {name: env[name] for name in args.param}
        check = (check_interpretation if args.cmd == "check-interp"
                 else check_expressibility)
        result = check(phi, k1, k2 if len(k2) > 1 else k2[0], universe,
                       params=params or None, max_work=args.max_work)
        res.update(_interp_result_dict(result))
        report.budgets["max_work"] = args.max_work

    elif args.cmd == "search-interp":
        k1 = parse_family_spec(args.k1, env)
        k2 = parse_family_spec(args.k2, env)
        found = search_interpretation(
            k1, k2, universe, max_m=args.max_m, max_size=args.max_size,
            max_depth=args.max_depth, max_work=args.max_work)
        res["found"] = found.found
        res["candidates_tried"] = found.candidates_tried
        res["exhausted"] = found.exhausted
        if found.found:
            res.update(_interp_result_dict(found.result))
        report.budgets["max_work"] = args.max_work

    elif args.cmd == "compose":
        k1 = parse_family_spec(args.k1, env)
        k2 = parse_family_spec(args.k2, env)
        k3 = parse_family_spec(args.k3, env)
        r12 = check_interpretation(_formula(args.phi12, env), k1, k2, universe,
                                   max_work=args.max_work)
        r23 = check_interpretation(_formula(args.phi23, env), k2, k3, universe,
                                   max_work=args.max_work)
        if not (r12.ok and r23.ok):
            res["ok"] = False
            res["failed_step"] = "1->2" if not r12.ok else "2->3"
        else:
            composed = compose_interpretations(r12.certificate, r23.certificate)
            res["ok"] = True
            res["certificate"] = _certificate_dict(composed)
        report.budgets["max_work"] = args.max_work

    elif args.cmd == "family":
        family = parse_family_spec(args.spec, env)
        res["spec"] = family.spec()
        res["arity"] = family.arity(universe)
        res["count"] = family.count(universe)
        if args.list:
            res["members"] = [sorted(map(list, m.sorted_tuples()))
                              for m in family.members(universe, args.max_family)]
        report.budgets["max_family"] = args.max_family

    return report


def cli_dispatch(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        report = _run(args)
    except BudgetExceededError as e:
        sys.stderr.write(f"budget exceeded: {e}\n")
        return 3
    except ConstructionBugError as e:
        sys.stderr.write(f"internal construction failure: {e}\n")
        return 1
    except (ToolkitError, OSError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    sys.stdout.write(write_report(report, args.format).decode("utf-8"))
    return 0


def main() -> None:
    raise SystemExit(cli_dispatch())


if __name__ == "__main__":
    main()
