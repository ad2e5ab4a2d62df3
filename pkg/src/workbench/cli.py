"""Command line entry point.

    workbench eval "<expr>" [--out FILE]
    workbench query "<query>" [--tol T] [--seed S] [--depth K] [--cap STATES]

Exit status: 0 success, 1 diagnostic, 2 state cap exceeded.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from . import automaton as core
from . import dsl, lab
from .errors import ResourceLimitError, WorkbenchError


def parse_args(argv):
    parser = argparse.ArgumentParser(prog="workbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"workbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate a set expression to an automaton")
    ev.add_argument("expr")
    ev.add_argument("--out", help="write the automaton file here instead of stdout")
    ev.add_argument("--cap", type=int, default=core.DEFAULT_STATE_CAP)

    q = sub.add_parser("query", help="run a query and print its report")
    q.add_argument("query")
    q.add_argument("--tol", type=float, default=1e-9)
    q.add_argument("--seed", type=int, default=lab.DEFAULT_SEED)
    q.add_argument("--depth", type=int, default=None, help="sample depth for experiments")
    q.add_argument("--samples", type=int, default=100_000)
    q.add_argument("--prefix", type=int, default=2000, help="enumerated prefix for probe_ii")
    q.add_argument("--cap", type=int, default=core.DEFAULT_STATE_CAP)
    q.add_argument("--csv", help="also write the report table as comma-separated values")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(sys.argv[1:] if argv is None else argv)
    try:
        with core.state_cap(args.cap):
            if args.command == "eval":
                node = dsl.parse(args.expr)
                if node.name in dsl.QUERIES:
                    raise dsl.DslError("eval takes a set expression; use 'query' for queries",
                                       node.pos)
                a = dsl.evaluate(node)
                if args.out:
                    core.save(a, args.out)
                    print(f"wrote {args.out}: {a.num_states} states, base {a.base}, "
                          f"arity {a.arity}")
                else:
                    sys.stdout.write(core.dumps(a))
                return 0
            opts = dsl.Options(tol=args.tol, seed=args.seed, depth=args.depth,
                               samples=args.samples, prefix=args.prefix)
            report = dsl.run(args.query, opts)
            sys.stdout.write(report.text)
            if args.csv:
                if report.csv_rows is None:
                    print("(no table to write for this query)", file=sys.stderr)
                else:
                    lab.write_csv(args.csv, report.csv_headers, report.csv_rows)
            return 0
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (WorkbenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
