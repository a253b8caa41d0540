"""Command line interface: ``signed-nullity <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .enumeration import EnumerationSpec, enumerate_graphs
from .graph import SignedGraph, canonical_hex, is_two_connected, m_le_1_check, resign, xi_le_1_check
from .harness import lemma_checks, report_emit, verify_theorem
from .matrix import RANK_TOL, MatrixError, load_matrix, max_nullity_search, sap_check, xi_search
from .minors import FORBIDDEN, PATTERNS, STRICT, WEAK, find_minor, forbidden_check
from .structure import (
    find_wide_separation,
    is_partial_wide_2_path,
    is_w4o_class,
    recognize_wide_2_path,
)

GLOBAL_DEFAULTS = {"seed": 0, "tol": RANK_TOL, "budget": 1000, "out": None}


def _emit(obj, out):
    text = json.dumps(obj, indent=1, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_pattern(name):
    if name in PATTERNS:
        return PATTERNS[name]
    return SignedGraph.load(name)


def cmd_enumerate(args):
    spec = EnumerationSpec(args.n_max, args.e_max, args.max_parallel, not args.all_connectivity, args.n_min)
    lines = [json.dumps(g.to_dict()) for g in enumerate_graphs(spec)]
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"{len(lines)} graphs written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args):
    spec = EnumerationSpec(args.n_max, args.e_max, args.max_parallel, True, args.n_min)
    report = verify_theorem(spec, budget=args.search_budget, seed=args.seed, witnesses=not args.no_witnesses)
    summary = dict(report.summary)
    if args.lemmas:
        checks = lemma_checks([r.graph for r in report.rows])
        summary["lemmas"] = {k: {"hypothesis": v["hypothesis"], "holds": v["holds"]} for k, v in checks.items()}
    if args.out:
        paths = report_emit(report, args.out)
        summary["files"] = paths
    print(json.dumps(summary, indent=1, sort_keys=True))
    return 0 if summary["disagree"] == 0 else 2


def cmd_check_minor(args):
    host = SignedGraph.load(args.host)
    pat = _load_pattern(args.pattern)
    emb = find_minor(host, pat, args.mode)
    _emit({"found": emb is not None, "pattern": args.pattern, "mode": args.mode,
           "witness": emb.to_dict() if emb else None}, args.out)
    return 0 if emb is not None else 1


def recognize_report(g: SignedGraph) -> dict:
    fc = forbidden_check(g, FORBIDDEN)
    ws = find_wide_separation(g)
    trace = recognize_wide_2_path(g)
    completion = is_partial_wide_2_path(g)
    return {
        "two_connected": is_two_connected(g),
        "forbidden": {"weak": fc[WEAK], "strict": fc[STRICT], "witnesses": fc["witnesses"],
                      "clear_weak": fc["clear_weak"], "clear_strict": fc["clear_strict"]},
        "wide_separation": ws.to_dict() if ws else None,
        "wide_2_path_trace": trace.to_dict() if trace else None,
        "partial_wide_2_path": None if completion is None else {
            "trace": completion[0].to_dict(),
            "mapping": {str(k): v for k, v in sorted(completion[1].items())},
            "resign_set": sorted(completion[2]),
        },
        "w4o_class": is_w4o_class(g),
        "m_le_1": m_le_1_check(g),
        "xi_le_1": xi_le_1_check(g),
    }


def cmd_recognize(args):
    _emit(recognize_report(SignedGraph.load(args.input)), args.out)
    return 0


def cmd_nullity_search(args):
    g = SignedGraph.load(args.input)
    if args.xi:
        res = xi_search(g, args.target, args.budget, args.seed, args.tol)
        cert, sap = res if res else (None, None)
    else:
        cert, sap = max_nullity_search(g, args.target, args.budget, args.seed, args.tol), None
    out = {"found": cert is not None, "target": args.target, "budget": args.budget, "seed": args.seed}
    if cert is not None:
        out["certificate"] = cert.to_dict()
    if sap is not None:
        out["sap"] = sap.to_dict()
    _emit(out, args.out)
    return 0 if cert is not None else 1


def cmd_sap_check(args):
    g = SignedGraph.load(args.graph)
    a, _ = load_matrix(args.matrix)
    try:
        rep = sap_check(a, g, args.tol)
    except MatrixError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2
    _emit(rep.to_dict(), args.out)
    return 0 if rep.holds else 1


def cmd_resign(args):
    g = SignedGraph.load(args.input)
    u = [int(x) for x in args.set.split(",") if x.strip()] if args.set else []
    h = resign(g, u)
    _emit(h.to_dict(), args.out)
    return 0


def cmd_canon(args):
    g = SignedGraph.load(args.input)
    key = canonical_hex(g)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(key + "\n")
    else:
        print(key)
    return 0


def build_parser(config: dict = None) -> argparse.ArgumentParser:
    """Parser whose defaults are overridden by ``config`` (flag names with dashes or underscores)."""
    config = {k.replace("-", "_"): v for k, v in (config or {}).items()}
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--budget", type=int)
    common.add_argument("--out")
    common.add_argument("--config", help="JSON file with defaults for any flag")

    # global flags live on every subcommand: signed-nullity <command> [--seed ...]
    p = argparse.ArgumentParser(prog="signed-nullity",
                                description="Signed graphs with maximum nullity at most two.")
    sub = p.add_subparsers(dest="command", required=True)

    def spec_flags(sp, n_max=6):
        sp.add_argument("--n-max", type=int, default=n_max)
        sp.add_argument("--n-min", type=int, default=2)
        sp.add_argument("--e-max", type=int, default=12)
        sp.add_argument("--max-parallel", type=int, default=2)

    sp = sub.add_parser("enumerate", parents=[common], help="list graph classes as JSON lines")
    spec_flags(sp)
    sp.add_argument("--all-connectivity", action="store_true", help="do not require 2-connectivity")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("verify-theorem", parents=[common], help="check the characterisation exhaustively")
    spec_flags(sp)
    sp.add_argument("--search-budget", type=int, default=0, help="restarts per graph for k=3 searches (0: skip)")
    sp.add_argument("--lemmas", action="store_true", help="also replicate the structural lemmas")
    sp.add_argument("--no-witnesses", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("check-minor", parents=[common], help="search a (weak) minor; exit 0 if found")
    sp.add_argument("--host", required=True)
    sp.add_argument("--pattern", required=True, help="pattern name or JSON file")
    sp.add_argument("--mode", choices=[WEAK, STRICT], default=WEAK)
    sp.set_defaults(func=cmd_check_minor)

    sp = sub.add_parser("recognize", parents=[common], help="structural report for one graph")
    sp.add_argument("--input", required=True)
    sp.set_defaults(func=cmd_recognize)

    sp = sub.add_parser("nullity-search", parents=[common], help="look for a member of S(G) with large nullity")
    sp.add_argument("--input", required=True)
    sp.add_argument("--target", type=int, required=True)
    sp.add_argument("--xi", action="store_true", help="require the Strong Arnold Property")
    sp.set_defaults(func=cmd_nullity_search)

    sp = sub.add_parser("sap-check", parents=[common], help="Strong Arnold Property of a matrix")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--matrix", required=True)
    sp.set_defaults(func=cmd_sap_check)

    sp = sub.add_parser("resign", parents=[common], help="re-sign a graph on a vertex set")
    sp.add_argument("--input", required=True)
    sp.add_argument("--set", default="", help="comma separated vertices")
    sp.set_defaults(func=cmd_resign)

    sp = sub.add_parser("canon", parents=[common], help="canonical key (hex)")
    sp.add_argument("--input", required=True)
    sp.set_defaults(func=cmd_canon)
    for sp in sub.choices.values():
        sp.set_defaults(**{**GLOBAL_DEFAULTS, **config})
    return p


def parse_args(argv=None):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    config = {}
    if known.config:
        with open(known.config) as fh:
            config = json.load(fh)
    return build_parser(config).parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    np.seterr(all="ignore")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
