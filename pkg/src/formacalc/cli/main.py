"""`formacalc` command: run scripts, run identity suites, or start a REPL."""

import argparse
import json
import os
import sys

from ..checks import SUITES, run_suite
from ..errors import FormacalcError
from ..formal import Space
from .checker import DEFAULT_ORDER
from .interpreter import Interpreter, Report, run_text
from .syntax import ScriptError, parse

SEED_ENV = "FORMACALC_SEED"


def default_seed():
    value = os.environ.get(SEED_ENV)
    try:
        return int(value) if value else 0
    except ValueError:
        return 0


def parse_space(text):
    try:
        n, k = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n,k, got {text!r}")
    if n < 0 or k < 0:
        raise argparse.ArgumentTypeError("space dimensions must be non-negative")
    return n, k


def build_parser():
    parser = argparse.ArgumentParser(prog="formacalc",
                                     description="Exact calculus on formal manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a script")
    run.add_argument("script", help="script file, or - for standard input")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--order", type=int, default=DEFAULT_ORDER,
                     help="truncation order for space declarations without one")
    run.add_argument("--max-degree", type=int, default=None,
                     help="reject values whose polynomial degree exceeds this")
    run.add_argument("--json", metavar="PATH", help="write the canonical JSON report here")

    check = sub.add_parser("check", help="run an identity suite")
    check.add_argument("suite", choices=sorted(SUITES))
    check.add_argument("--space", type=parse_space, required=True, metavar="N,K")
    check.add_argument("--order", type=int, default=DEFAULT_ORDER)
    check.add_argument("--samples", type=int, default=10)
    check.add_argument("--seed", type=int, default=None)
    check.add_argument("--json", metavar="PATH")

    repl = sub.add_parser("repl", help="interactive line-oriented session")
    repl.add_argument("--seed", type=int, default=None)
    repl.add_argument("--order", type=int, default=DEFAULT_ORDER)
    return parser


def write_json(path, data):
    text = json.dumps(data, sort_keys=True, indent=2)
    if path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_run(args):
    seed = args.seed if args.seed is not None else default_seed()
    if args.script == "-":
        text = sys.stdin.read()
    else:
        with open(args.script) as fh:
            text = fh.read()
    report = run_text(text, seed=seed, default_order=args.order, max_degree=args.max_degree)
    out = report.text()
    if out:
        print(out)
    if args.json:
        write_json(args.json, report.to_json())
    return report.exit_code


def cmd_check(args):
    seed = args.seed if args.seed is not None else default_seed()
    n, k = args.space
    space = Space(n, k, args.order)
    try:
        result = run_suite(args.suite, space, args.samples, seed)
    except FormacalcError as err:
        print(f"error[{err.code}]: {err}", file=sys.stderr)
        return 1
    status = "PASS" if result.passed else "FAIL"
    print(f"check {args.suite} on {space}: {status} ({result.checked} samples)")
    if result.witness:
        print(f"witness: {result.witness}")
    if args.json:
        write_json(args.json, result.to_json())
    return 0 if result.passed else 1


def cmd_repl(args, stdin=None, stdout=None):
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    seed = args.seed if args.seed is not None else default_seed()
    interp = Interpreter(seed, args.order)
    buffer = ""
    status = 0
    prompt = "formacalc> "
    interactive = stdin.isatty()
    while True:
        if interactive:
            stdout.write(prompt if not buffer else "       ... ")
            stdout.flush()
        line = stdin.readline()
        if not line:
            break
        buffer += line
        if ";" not in line:
            continue
        try:
            script = parse(buffer)
        except ScriptError as err:
            stdout.write(f"{err.line}:{err.col}: error[{err.code}]: {err}\n")
            buffer = ""
            status = 2
            continue
        buffer = ""
        report = interp.run_script(script, Report(seed=seed))
        if report.text():
            stdout.write(report.text() + "\n")
        status = max(status, report.exit_code)
    return status


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "check":
        return cmd_check(args)
    return cmd_repl(args)


if __name__ == "__main__":
    sys.exit(main())
