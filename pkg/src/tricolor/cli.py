"""Command-line interface.

Exit status is 0 on success, 1 when the operation itself fails (ill-formed
input, failed unification, no derivation, exhausted transfer) and 2 for
usage and parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from tricolor import __version__
from tricolor.core import Indefinite, TdagError, Unified, check_well_formed, subsumes, unify
from tricolor.dot import export_dot
from tricolor.generator import GenReport, default_depth, format_call_trace, generate
from tricolor.grammar import AnalysisError, Grammar, GrammarError, analyze, load_grammar
from tricolor.partition import classify
from tricolor.textformat import FormatError, load_tdag, parse_tdag, serialize_tdag, tdag_to_json
from tricolor.transfer import (Exhausted, StrategyTable, TransferError, format_trace, load_strategies,
                               parse_ops, plan_transfer, replay)


class DomainFailure(Exception):
    """The command ran but its answer is a failure; exit status 1."""

    def __init__(self, message: str, payload: Optional[dict] = None):
        super().__init__(message)
        self.payload = payload


def bundled(name: str) -> Path:
    """Path of a fixture shipped with the package."""
    return Path(str(resources.files("tricolor") / "data" / name))


def _emit(args, text: str, payload: dict) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _strategies(path: Optional[str]) -> StrategyTable:
    return load_strategies(path or bundled("strategies.cfg"))


def _gen_payload(report: GenReport, grammar: Grammar, trace: bool) -> tuple[str, dict]:
    cov = {k: str(v) for k, v in sorted(report.coverage.items())}
    term = report.termination
    payload: dict = {"ok": report.ok, "coverage": cov}
    if term is not None:
        payload["termination"] = {"T1": term.t1, "T2": term.t2, "T3": term.t3,
                                  "underived": list(term.underived)}
    if report.ok:
        d = report.derivation
        payload["surface"] = d.surface
        payload["derived"] = tdag_to_json(d.derived)
        text = ""
        if trace:
            payload["trace"] = format_call_trace(grammar, d)
            text = payload["trace"]
        return text + d.surface + "\n", payload
    payload["reason"] = report.outcome.reason
    return "", payload


# -- subcommands ----------------------------------------------------------


def cmd_check(args) -> int:
    t = parse_tdag(Path(args.tdag).read_text(encoding="utf-8"), args.tdag, allow_duplicate_features=True)
    vs = check_well_formed(t)
    payload = {"well_formed": not vs, "violations": [
        {"condition": v.condition, "element": v.element, "message": v.message} for v in vs]}
    if vs:
        raise DomainFailure("\n".join(str(v) for v in vs), payload)
    _emit(args, "well-formed", payload)
    return 0


def cmd_unify(args) -> int:
    result = unify(load_tdag(args.a), load_tdag(args.b))
    if isinstance(result, Unified):
        _emit(args, serialize_tdag(result.tdag), {"outcome": "unified", "tdag": tdag_to_json(result.tdag)})
        return 0
    path = "<" + " ".join(result.path) + ">"
    if isinstance(result, Indefinite):
        raise DomainFailure(f"indefinite: green atoms {result.atoms[0]} and {result.atoms[1]} meet at {path}",
                            {"outcome": "indefinite", "atoms": list(result.atoms), "path": list(result.path)})
    raise DomainFailure(f"failure: {result.reason} at {path}",
                        {"outcome": "failure", "reason": result.reason, "path": list(result.path)})


def cmd_subsume(args) -> int:
    a, b = load_tdag(args.a), load_tdag(args.b)
    yes = subsumes(a, b)
    _emit(args, f"{args.a} {'subsumes' if yes else 'does not subsume'} {args.b}", {"subsumes": yes})
    return 0


def cmd_transfer(args) -> int:
    t = load_tdag(args.tdag)
    if args.replay:
        trace = replay(t, parse_ops(Path(args.replay).read_text(encoding="utf-8")))
    else:
        if not args.grammar:
            raise argparse.ArgumentTypeError("transfer needs --replay or --grammar")
        grammar = load_grammar(args.grammar)
        depth = args.depth or default_depth()
        result = plan_transfer(t, lambda s: generate(s, grammar, depth).ok, _strategies(args.strategies),
                               args.budget)
        if isinstance(result, Exhausted):
            raise DomainFailure(f"transfer exhausted after {result.states_explored} states: {result.reason}",
                                {"ok": False, "states_explored": result.states_explored})
        trace = result
    ops = format_trace(trace)
    if args.out:
        Path(args.out).write_text(serialize_tdag(trace.final), encoding="utf-8")
    _emit(args, ops + ("" if args.out else serialize_tdag(trace.final)),
          {"ok": True, "ops": ops.splitlines(), "final": tdag_to_json(trace.final)})
    return 0


def cmd_classify(args) -> int:
    report = classify(load_tdag(args.source), load_tdag(args.target))
    _emit(args, report.format(), report.to_json())
    return 0


def cmd_analyze(args) -> int:
    grammar = load_grammar(args.grammar)
    a = analyze(args.sentence.split(), grammar)
    if args.out:
        Path(args.out).write_text(serialize_tdag(a.tdag), encoding="utf-8")
    _emit(args, serialize_tdag(a.tdag), {"parses": a.parses, "tree": str(a.tree), "tdag": tdag_to_json(a.tdag)})
    return 0


def cmd_generate(args) -> int:
    grammar = load_grammar(args.grammar)
    report = generate(load_tdag(args.tdag), grammar, args.depth)
    text, payload = _gen_payload(report, grammar, args.trace)
    if not report.ok:
        raise DomainFailure(f"generation failed: {report.outcome.reason}", payload)
    _emit(args, text, payload)
    return 0


def cmd_translate(args) -> int:
    src, tgt = load_grammar(args.src), load_grammar(args.tgt)
    depth = args.depth or default_depth()
    source = analyze(args.sentence.split(), src).tdag
    plan = plan_transfer(source, lambda s: generate(s, tgt, depth).ok, _strategies(args.strategies), args.budget)
    if isinstance(plan, Exhausted):
        raise DomainFailure(f"no transfer found after {plan.states_explored} states: {plan.reason}",
                            {"ok": False, "states_explored": plan.states_explored})
    report = generate(plan.final, tgt, depth)
    d = report.derivation
    partition = classify(source, d.derived)
    payload = {"ok": True, "surface": d.surface, "transfer": format_trace(plan).splitlines(),
               "partition": partition.to_json()}
    text = d.surface + "\n"
    if args.verbose:
        text += "\ntransfer:\n" + (format_trace(plan) or "(none)\n") + "\n" + partition.format()
    _emit(args, text, payload)
    return 0


def cmd_export_dot(args) -> int:
    text = export_dot(load_tdag(args.tdag))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _emit(args, f"wrote {args.out}", {"path": args.out})
    else:
        _emit(args, text, {"dot": text})
    return 0


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text", help="output format")

    p = argparse.ArgumentParser(prog="tricolor", description="Tricolor DAGs for transfer and generation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help, description=help)
        sp.set_defaults(func=fn)
        return sp

    sp = add("check", cmd_check, "check well-formedness of a TDAG file")
    sp.add_argument("tdag")

    sp = add("unify", cmd_unify, "unify two TDAGs")
    sp.add_argument("a")
    sp.add_argument("b")

    sp = add("subsume", cmd_subsume, "test whether A subsumes B")
    sp.add_argument("a")
    sp.add_argument("b")

    sp = add("transfer", cmd_transfer, "replay or plan a transfer sequence")
    sp.add_argument("tdag")
    sp.add_argument("--replay", metavar="OPS", help="op file to replay")
    sp.add_argument("--grammar", help="target grammar; plan until it generates")
    sp.add_argument("--strategies", help="strategy table (default: bundled)")
    sp.add_argument("--budget", type=int, default=8, help="maximum number of ops (default 8)")
    sp.add_argument("--depth", type=int, help="generation depth budget")
    sp.add_argument("--out", help="write the final TDAG here")

    sp = add("classify", cmd_classify, "partition source constraints against a target")
    sp.add_argument("--source", required=True)
    sp.add_argument("--target", required=True)

    sp = add("analyze", cmd_analyze, "parse a sentence into a TDAG")
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--sentence", required=True)
    sp.add_argument("--out", help="write the TDAG here")

    sp = add("generate", cmd_generate, "generate a sentence from a TDAG")
    sp.add_argument("--tdag", required=True)
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--depth", type=int, help="depth budget (default: TRICOLOR_DEPTH or 12)")
    sp.add_argument("--trace", action="store_true", help="print the call-structured derivation log")

    sp = add("translate", cmd_translate, "analyze, transfer, generate and classify")
    sp.add_argument("--sentence", required=True)
    sp.add_argument("--src", required=True, help="source grammar")
    sp.add_argument("--tgt", required=True, help="target grammar")
    sp.add_argument("--strategies", help="strategy table (default: bundled)")
    sp.add_argument("--budget", type=int, default=8)
    sp.add_argument("--depth", type=int)
    sp.add_argument("-v", "--verbose", action="store_true", help="also print the transfer and partition")

    sp = add("export-dot", cmd_export_dot, "write a TDAG as Graphviz DOT")
    sp.add_argument("tdag")
    sp.add_argument("--out")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format
    try:
        if getattr(args, "depth", None) is not None and args.depth < 1:
            raise argparse.ArgumentTypeError("--depth must be at least 1")
        if getattr(args, "budget", None) is not None and args.budget < 0:
            raise argparse.ArgumentTypeError("--budget must be non-negative")
        return args.func(args)
    except DomainFailure as e:
        if fmt == "json" and e.payload is not None:
            print(json.dumps(e.payload, indent=2, sort_keys=True))
        print(f"tricolor: {e}", file=sys.stderr)
        return 1
    except (TransferError, AnalysisError, TdagError) as e:
        if fmt == "json":
            print(json.dumps({"ok": False, "error": str(e)}, sort_keys=True))
        print(f"tricolor: {e}", file=sys.stderr)
        return 1
    except (FormatError, GrammarError, argparse.ArgumentTypeError, ValueError, OSError) as e:
        print(f"tricolor: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
