"""Command-line interface: ``permdd {perm,gen,bench,encode}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bench import RunSpec, run_bench, summarize, write_instances, write_summary
from .cnf import encode_permanent, write_dimacs
from .errors import (GenerationError, InternalAssertion, LimitExceeded, NodeBudgetExceeded,
                     ParseError, Timeout)
from .matrix import GenParams, read_matrix
from .permanent import ALGORITHMS, HEURISTICS, PermConfig, perm

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_TIMEOUT = 4
EXIT_NODE_BUDGET = 5
EXIT_ASSERTION = 6


def _fail(msg: str, code: int) -> int:
    print(f"permdd: {msg}", file=sys.stderr)
    return code


def _read(args):
    return read_matrix(args.matrix, None if args.format == "auto" else args.format)


def cmd_perm(args) -> int:
    try:
        m = _read(args)
    except ParseError as e:
        return _fail(f"{args.matrix}: {e}", EXIT_PARSE)
    except OSError as e:
        return _fail(str(e), EXIT_ERROR)
    try:
        cfg = PermConfig(algorithm=args.algo, heuristic=args.heuristic, order=args.order,
                         timeout=args.timeout_secs, node_budget=args.node_budget,
                         brute_limit=args.size_limit or 12, gray_limit=args.size_limit or 30)
    except ValueError as e:
        return _fail(str(e), EXIT_USAGE)
    try:
        res = perm(m, cfg)
    except Timeout as e:
        return _fail(f"timeout: {e}", EXIT_TIMEOUT)
    except NodeBudgetExceeded as e:
        return _fail(str(e), EXIT_NODE_BUDGET)
    except InternalAssertion as e:
        return _fail(f"internal assertion failed: {e}", EXIT_ASSERTION)
    except LimitExceeded as e:
        return _fail(str(e), EXIT_USAGE)
    print(res.value)
    if not args.quiet:
        stats = dict(res.stats, algorithm=res.algorithm, n=m.n)
        print(json.dumps(stats), file=sys.stderr)
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        GenParams(args.family, args.n, args.cf, args.rho, args.seed)
    except ValueError as e:
        return _fail(str(e), EXIT_USAGE)
    try:
        paths = write_instances(args.out_dir, args.family, args.n, args.cf, args.rho,
                                args.count, args.seed, args.max_attempts)
    except GenerationError as e:
        return _fail(str(e), EXIT_ERROR)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        specs = [RunSpec.parse(c) for c in (args.config or ["early"])]
    except ValueError as e:
        return _fail(str(e), EXIT_USAGE)
    paths = []
    for item in args.instances:
        p = Path(item)
        paths.extend(sorted(x for x in p.iterdir() if x.is_file()) if p.is_dir() else [p])
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        records = run_bench(paths, specs, out, timeout=args.timeout_secs,
                            node_budget=args.node_budget, jobs=args.jobs,
                            extrapolate_timeouts=args.extrapolate_timeouts)
    finally:
        if args.out:
            out.close()
    rows = summarize(records)
    if args.summary:
        with open(args.summary, "w", newline="") as fh:
            write_summary(rows, fh)
    elif not args.quiet:
        write_summary(rows, sys.stderr)
    return EXIT_OK


def cmd_encode(args) -> int:
    try:
        m = _read(args)
    except ParseError as e:
        return _fail(f"{args.matrix}: {e}", EXIT_PARSE)
    except OSError as e:
        return _fail(str(e), EXIT_ERROR)
    f = encode_permanent(m)
    try:
        if args.out:
            with open(args.out, "w", encoding="ascii", newline="\n") as fh:
                write_dimacs(f, fh, comments=not args.no_comments)
        else:
            write_dimacs(f, sys.stdout, comments=not args.no_comments)
    except OSError as e:
        return _fail(str(e), EXIT_ERROR)
    print(f"variables={f.num_vars} clauses={f.num_clauses}", file=sys.stderr)
    return EXIT_OK


def _budget(text: str) -> int | None:
    v = int(text)
    return None if v <= 0 else v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="permdd", description="Permanents of 0-1 matrices via ADDs.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("perm", help="compute the permanent of a matrix file")
    p.add_argument("matrix")
    p.add_argument("--algo", choices=ALGORITHMS, default="early")
    p.add_argument("--heuristic", choices=HEURISTICS, default=None,
                   help="clustering for --algo early (default: by density)")
    p.add_argument("--order", choices=("index", "mcs"), default=None,
                   help="cluster rank-order for --algo early")
    p.add_argument("--timeout-secs", type=float, default=None)
    p.add_argument("--node-budget", type=_budget, default=50_000_000, help="0 disables")
    p.add_argument("--format", choices=("auto", "dense", "mm"), default="auto")
    p.add_argument("--size-limit", type=int, default=None,
                   help="largest n accepted by brute/gray")
    p.add_argument("-q", "--quiet", action="store_true", help="omit stats on stderr")
    p.set_defaults(func=cmd_perm)

    g = sub.add_parser("gen", help="generate random benchmark matrices")
    g.add_argument("--family", choices=("dense", "sparse", "similar"), required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--cf", type=float, required=True, help="flip factor; round(cf*n) cells flip")
    g.add_argument("--rho", type=float, default=None, help="starting row density (similar family)")
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", default=".")
    g.add_argument("--max-attempts", type=int, default=1000)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="run configurations over instances and emit CSV")
    b.add_argument("instances", nargs="+", help="instance files or directories")
    b.add_argument("--config", action="append",
                   help="ALGO[:HEURISTIC[:ORDER]], repeatable (default: early)")
    b.add_argument("--timeout-secs", type=float, default=1800.0)
    b.add_argument("--node-budget", type=_budget, default=50_000_000)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", default=None, help="CSV path (default stdout)")
    b.add_argument("--summary", default=None, help="summary CSV path (default stderr)")
    b.add_argument("--extrapolate-timeouts", action="store_true")
    b.add_argument("-q", "--quiet", action="store_true")
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("encode", help="write the #SAT encoding as DIMACS CNF")
    e.add_argument("matrix")
    e.add_argument("--out", default=None)
    e.add_argument("--format", choices=("auto", "dense", "mm"), default="auto")
    e.add_argument("--no-comments", action="store_true", help="omit the c map lines")
    e.set_defaults(func=cmd_encode)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
