"""Command-line entry point: ``derive``, ``gen``, ``bench`` and ``verify``.

Exit codes: 0 on success, 1 on invalid input (the message names the flag),
2 when an internal invariant check fails.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import __version__
from . import typecalc as tc
from .bench import BenchConfig, BenchError, VARIANTS, TASKS, emit_csv, run_bench
from .workload import FormatError, GenConfig, Scenario, write_pair

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTERNAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _seed(text: str) -> int:
    try:
        n = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= n < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return n


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=argparse.SUPPRESS,
                        help="64-bit seed for generated inputs")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress all non-error output")

    p = _Parser(prog="zipbench", parents=[common],
                description="Zippers versus root-based access: type derivation, "
                            "workload generation, benchmarks and oracle checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    d = sub.add_parser("derive", parents=[common], help="differentiate a type expression")
    d.add_argument("--expr", required=True, help="s-expression: 0 | 1 | ident | (+ e e) | "
                                                 "(* e e) | (mu ident e) | (list e)")
    d.add_argument("--var", required=True, help="variable to differentiate by")
    d.add_argument("--normalize", action="store_true", help="print the canonical normal form")

    g = sub.add_parser("gen", parents=[common], help="write a cursor/root command stream pair")
    g.add_argument("--depth", type=_positive_int, required=True)
    g.add_argument("--count", type=_positive_int, required=True)
    g.add_argument("--scenario", choices=[s.value for s in Scenario], default="uniform")
    g.add_argument("--out-prefix", required=True,
                   help="writes PREFIX.cursor.cmds and PREFIX.root.cmds")

    b = sub.add_parser("bench", parents=[common], help="time one benchmark configuration")
    b.add_argument("--task", choices=TASKS, required=True)
    b.add_argument("--variant", choices=VARIANTS, required=True)
    b.add_argument("--scenario", choices=[s.value for s in Scenario])
    b.add_argument("--input", help="command file, or the prefix given to gen")
    b.add_argument("--depth", type=_positive_int)
    b.add_argument("--count", type=_positive_int)
    b.add_argument("--time-limit", type=_positive_float, default=10.0, metavar="SECS")
    b.add_argument("--min-iters", type=_positive_int, default=3, metavar="K")
    b.add_argument("--csv", metavar="PATH", help="write the record as CSV")

    v = sub.add_parser("verify", parents=[common], help="run oracle and invariant suites")
    v.add_argument("--suite", action="append", metavar="NAME",
                   help="suite to run (repeatable): all, " + ", ".join(_suite_names()))
    v.add_argument("--trials", type=_positive_int, help="random cases per suite")
    return p


def _suite_names() -> List[str]:
    from .verify import SUITES
    return list(SUITES)


def _out(args, text: str) -> None:
    if not getattr(args, "quiet", False):
        print(text)


def cmd_derive(args) -> int:
    try:
        expr = tc.parse(args.expr)
    except tc.TypeCalculusError as exc:
        raise UsageError(f"--expr: {exc}") from None
    if not tc._is_ident(args.var):
        raise UsageError(f"--var: bad identifier {args.var!r}")
    try:
        result = tc.differentiate(expr, args.var)
    except tc.TypeCalculusError as exc:
        raise UsageError(f"--expr: {exc}") from None
    if args.normalize:
        result = tc.normalize(result)
    _out(args, tc.unparse(result))
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = GenConfig(args.depth, args.count, Scenario(args.scenario), getattr(args, "seed", 0))
    try:
        paths = write_pair(cfg, args.out_prefix)
    except OSError as exc:
        raise UsageError(f"--out-prefix: {exc}") from None
    for path in paths:
        _out(args, path)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.task == "insertion":
        if args.count is None:
            raise UsageError("--count is required for --task insertion")
        for flag in ("input", "depth", "scenario"):
            if getattr(args, flag) is not None:
                raise UsageError(f"--{flag} only applies to --task traversal")
        size = args.count
    else:
        if args.input is None:
            raise UsageError("--input is required for --task traversal")
        if args.count is not None:
            raise UsageError("--count only applies to --task insertion")
        size = args.depth
    try:
        cfg = BenchConfig(args.task, args.variant, size=size, scenario=args.scenario,
                          input=args.input, time_limit=args.time_limit, min_iters=args.min_iters)
        rec = run_bench(cfg)
    except (BenchError, FormatError) as exc:
        raise UsageError(str(exc)) from None
    except OSError as exc:
        raise UsageError(f"--input: {exc}") from None
    _out(args, f"{rec.task} {rec.variant} {rec.scenario or '-'} size={rec.size} "
               f"iterations={rec.iterations} mean_ns={rec.mean_ns:.0f} "
               f"stddev_ns={rec.stddev_ns:.0f} checksum={rec.checksum:016x}")
    if args.csv:
        try:
            emit_csv([rec], args.csv)
        except OSError as exc:
            raise UsageError(f"--csv: {exc}") from None
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import SUITES, run_suites

    names = args.suite or ["all"]
    if "all" in names:
        names = list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise UsageError(f"--suite: unknown suite {unknown[0]!r} "
                         f"(choose from all, {', '.join(SUITES)})")
    kwargs = {}
    if hasattr(args, "seed"):
        kwargs["seed"] = args.seed
    results = run_suites(names, trials=args.trials, **kwargs)
    failed = False
    for r in results:
        _out(args, r.summary())
        if not r.ok:
            failed = True
            for f in r.failures:
                print(f"  FAIL {r.name}: {f}", file=sys.stderr)
    total = sum(r.passed for r in results), sum(r.total for r in results)
    _out(args, f"total: {total[0]}/{total[1]} passed")
    return EXIT_INTERNAL if failed else EXIT_OK


COMMANDS = {"derive": cmd_derive, "gen": cmd_gen, "bench": cmd_bench, "verify": cmd_verify}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"zipbench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AssertionError, ArithmeticError, tc.TypeCalculusError) as exc:
        print(f"zipbench {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
