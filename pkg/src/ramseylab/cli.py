"""Command-line front end.

Exit codes: 0 success, 1 domain failure (a check failed, a run
blocked), 2 usage or parse failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import coloring as col
from . import forcing, functionals, halting, reductions, runner, trees

USAGE_ERROR = 2
DOMAIN_ERROR = 1


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _default_theta():
    raw = os.environ.get("RAMSEYLAB_THETA")
    return int(raw) if raw else None


def _write_or_print(data, path):
    text = json.dumps(data, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_check(args) -> int:
    if args.condition:
        cond = forcing.Condition.from_dict(_load_json(args.condition))
        bad = forcing.validate_condition(cond)
        if bad:
            print(f"invalid condition: first violation {bad[0]}")
            return DOMAIN_ERROR
        print("condition ok")
        return 0
    if args.functional:
        gamma = functionals.OracleFunctional.from_dict(_load_json(args.functional))
        bad = functionals.check_consistency(gamma)
        if bad:
            print(f"inconsistent functional: axiom pairs {bad}")
            return DOMAIN_ERROR
        print("functional consistent")
        return 0
    f = col.Coloring.from_dict(_load_json(args.coloring))
    raw = _load_json(args.set)
    subject = col.JoinedSet(raw) if args.kind in ("p-homog", "incr-p-homog") else raw
    verdict = col.check_homogeneity(f, subject, args.kind)
    if verdict is None:
        print(f"not {args.kind}")
        return DOMAIN_ERROR
    if verdict is col.VACUOUS:
        print(f"{args.kind}: vacuous (nothing to check)")
        return 0
    print(f"{args.kind} with color {verdict}")
    return 0


def cmd_reduce(args) -> int:
    f = col.Coloring.from_dict(_load_json(args.coloring))
    raw = _load_json(args.solution)
    src, dst = args.kind_from, args.kind_to
    if (src, dst) in (("SRT", "SPT"), ("SPT", "SIPT"), ("SIPT", "D")):
        sol = col.JoinedSet(raw) if src in ("SPT", "SIPT") else raw
        out = reductions.forward_chain(src, dst, sol)
    elif (src, dst) == ("SIPT", "SRT"):
        out = reductions.ipt_to_homogeneous(f, col.JoinedSet(raw))
    elif (src, dst) == ("D", "SRT"):
        elements = sorted(raw)
        if not elements:
            print("empty limit-homogeneous set", file=sys.stderr)
            return DOMAIN_ERROR
        verdict = col.check_homogeneity(f, elements, "limit-homog")
        if verdict is None:
            print("input set is not limit homogeneous", file=sys.stderr)
            return DOMAIN_ERROR
        color = f.limits[elements[0]][0]
        out = reductions.limit_to_homogeneous(f, elements, color)
    else:
        print(f"unsupported translation {src} -> {dst}", file=sys.stderr)
        return USAGE_ERROR
    if isinstance(out, col.JoinedSet):
        data = sorted(out.elements)
    else:
        data = sorted(out)
    _write_or_print(data, args.out)
    return 0


def cmd_code(args) -> int:
    approx = halting.CEApproximation.from_dict(_load_json(args.approx))
    if args.action == "encode":
        f = halting.build_coding_coloring(approx, args.horizon)
        _write_or_print(f.to_dict(), args.out)
        return 0
    z_set = col.JoinedSet(_load_json(args.solution))
    targets = [args.z] if args.z is not None else list(range(approx.domain))
    ok = True
    for z in targets:
        decoded = halting.decode_membership(approx, z_set, z)
        final = z in approx.final
        agree = decoded == final
        ok = ok and agree
        print(f"z={z} decoded={decoded} final={final} {'ok' if agree else 'MISMATCH'}")
    return 0 if ok else DOMAIN_ERROR


def _parse_reservoir(spec: str):
    if ".." in spec:
        lo, hi = spec.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(tok) for tok in spec.split(",") if tok)


def cmd_tree(args) -> int:
    gamma = functionals.OracleFunctional.from_dict(_load_json(args.functional))
    segment = frozenset(_load_json(args.segment)) if args.segment else frozenset()
    params = trees.TreeParams(
        k=args.k,
        gamma=gamma,
        segment=segment,
        reservoir=_parse_reservoir(args.reservoir),
        arity=args.arity,
        variant=args.variant,
        depth_cap=args.depth_cap,
    )
    tree = trees.build_tree(params)
    theta = args.theta if args.theta is not None else _default_theta()
    stage = "built"
    try:
        tree = trees.label_tree(tree, theta)
        stage = "labeled"
        if args.subtree:
            tree = trees.labeled_subtree(tree, theta)
            stage = "labeled subtree"
            if args.arity == 3:
                tree = trees.compute_sort(tree, theta)
    except trees.UnlabelableError as exc:
        print(f"tree not labelable: leaf {list(exc.leaf)}")
    terminals = sum(1 for i in tree.nodes.values() if i.kind == "witness-terminal")
    print(f"{stage}: {len(tree.nodes)} nodes, {terminals} witness-terminal")
    if args.json:
        _write_or_print(trees.tree_to_dict(tree), args.json)
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(trees.to_dot(tree) + "\n")
    return 0


def cmd_run(args) -> int:
    config = _load_json(args.schedule)
    state, transcript = runner.run_stages(config)
    if args.out:
        runner.dump_transcript(transcript, args.out)
    blocked = False
    for event in transcript:
        print(f"stage {event['stage']} [{event['step']}] -> {event['outcome']}")
        if event["outcome"] == "blocked":
            print(f"  reason: {event['payload'].get('reason')}")
            blocked = True
    if args.verify:
        problems = runner.verify_transcript(transcript, config)
        for p in problems:
            print(f"verify: {p}")
        print(f"verify: {'ok' if not problems else f'{len(problems)} problem(s)'}")
        return 0 if not problems and not blocked else DOMAIN_ERROR
    return 0 if not blocked else DOMAIN_ERROR


def cmd_relations(args) -> int:
    matrix = reductions.relation_matrix()
    if args.query:
        p, q, notion = args.query
        entry = matrix.query(p, q, notion)
        print(f"{p} <={notion} {q}: {entry.status} ({entry.citation})")
        return 0
    if args.json:
        _write_or_print(matrix.to_json_dict(), None)
        return 0
    for line in matrix.table_lines():
        print(line)
    return 0


def cmd_gen(args) -> int:
    if args.what == "coloring":
        f = col.random_stable_coloring(args.seed, args.horizon, args.stab_bound)
        _write_or_print(f.to_dict(), args.out)
    else:
        approx = halting.random_approximation(args.seed, args.domain, args.stages)
        _write_or_print(approx.to_dict(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ramseylab",
        description="finite-universe laboratory for stable pair-colorings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="homogeneity, condition, or functional checks")
    p.add_argument("--coloring")
    p.add_argument("--set")
    p.add_argument("--kind", choices=col.KINDS)
    p.add_argument("--condition")
    p.add_argument("--functional")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce", help="translate a solution between principle shapes")
    p.add_argument("--from", dest="kind_from", required=True, choices=reductions.PRINCIPLES)
    p.add_argument("--to", dest="kind_to", required=True, choices=reductions.PRINCIPLES)
    p.add_argument("--coloring", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("code", help="halting-set coding coloring and decoder")
    p.add_argument("action", choices=("encode", "decode"))
    p.add_argument("--approx", required=True)
    p.add_argument("--horizon", type=int, default=12)
    p.add_argument("--solution")
    p.add_argument("--z", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_code)

    p = sub.add_parser("tree", help="build and label a diagonalization tree")
    p.add_argument("--functional", required=True)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--reservoir", required=True, help="e.g. 1..6 or 1,3,5")
    p.add_argument("--arity", type=int, default=2, choices=(2, 3))
    p.add_argument("--variant", default="plain", choices=trees.VARIANTS)
    p.add_argument("--depth-cap", type=int, default=4)
    p.add_argument("--theta", type=int)
    p.add_argument("--segment", help="JSON file with committed joined codes")
    p.add_argument("--subtree", action="store_true")
    p.add_argument("--dot")
    p.add_argument("--json")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("run", help="execute a schedule and emit a transcript")
    p.add_argument("--schedule", required=True)
    p.add_argument("--out")
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("relations", help="registry of reductions between principles")
    p.add_argument("--query", nargs=3, metavar=("FROM", "TO", "NOTION"))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_relations)

    p = sub.add_parser("gen", help="generate random instances")
    p.add_argument("what", choices=("coloring", "approx"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=16)
    p.add_argument("--stab-bound", type=int, default=5)
    p.add_argument("--domain", type=int, default=8)
    p.add_argument("--stages", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    if args.command == "check" and not args.condition and not args.functional:
        if not (args.coloring and args.set and args.kind):
            print("check needs --coloring/--set/--kind or --condition or --functional",
                  file=sys.stderr)
            return USAGE_ERROR
    try:
        return args.func(args)
    except (json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
