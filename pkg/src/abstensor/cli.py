"""Command-line front end.

Exit codes: 0 ok, 1 not equivalent, 2 usage, 3 parse error, 4 type error,
5 oracle bound exceeded.  Errors go to stderr as one JSON object; stdout only
carries the payload.
"""
from __future__ import annotations

import argparse
import json
import sys

from .core import Label, TensorError
from .diagram import diagram_json, to_diagram, to_dot
from .normal_form import OracleBoundExceeded, canonical, equivalent, oracle_equivalent
from .syntax import SourceError, format_expression, parse
from .valuation import evaluate

EXIT_OK = 0
EXIT_NOT_EQUAL = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_TYPE = 4
EXIT_ORACLE_BOUND = 5
EXIT_INTERNAL = 70


class CliError(Exception):
    def __init__(self, kind: str, code: int, message: str, **extra):
        super().__init__(message)
        self.kind, self.code, self.message, self.extra = kind, code, message, extra


def _report(err: CliError) -> int:
    payload = {"error": err.kind, "code": err.code, "message": err.message, **err.extra}
    print(json.dumps(payload), file=sys.stderr)
    return err.code


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", EXIT_USAGE, message)


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError("usage", EXIT_USAGE, f"cannot read {path}: {exc.strerror}") from None
    return parse(text)


def _expr(src, name: str):
    try:
        return src.expression(name)
    except KeyError as exc:
        raise CliError("usage", EXIT_USAGE, exc.args[0]) from None


def _order(e, names: str | None, side: str):
    free = e.free_lower if side == "lower" else e.free_upper
    if names is None:
        return sorted(free)
    by_name = {l.name: l for l in free}
    wanted = [n.strip() for n in names.split(",") if n.strip()]
    missing = [n for n in wanted if n not in by_name]
    if missing or len(set(wanted)) != len(free) or len(wanted) != len(free):
        raise CliError(
            "usage", EXIT_USAGE,
            f"--{side} must list the free {side} labels exactly once each: "
            + ",".join(sorted(by_name)),
        )
    return [by_name[n] for n in wanted]


def cmd_reduce(args, out):
    src = _load(args.file)
    e = _expr(src, args.expr)
    out.write(format_expression(canonical(e).expression()) + "\n")
    return EXIT_OK


def cmd_eq(args, out):
    src = _load(args.file)
    left, right = _expr(src, args.left), _expr(src, args.right)
    result = equivalent(left, right)
    if args.oracle:
        try:
            check = oracle_equivalent(left, right, args.max_factors, args.max_bound)
        except OracleBoundExceeded as exc:
            raise CliError("oracle-bound", EXIT_ORACLE_BOUND, str(exc)) from None
        if check != result:
            raise CliError(
                "oracle-disagreement", EXIT_INTERNAL,
                f"decision procedure says {result}, oracle says {check}",
            )
    out.write(("true" if result else "false") + "\n")
    return EXIT_OK if result else EXIT_NOT_EQUAL


def cmd_eval(args, out):
    src = _load(args.file)
    e = _expr(src, args.expr)
    v = src.valuation()
    t = evaluate(e, v, _order(e, args.lower, "lower"), _order(e, args.upper, "upper"))
    out.write(t.to_json() + "\n")
    return EXIT_OK


def _diagram(args):
    src = _load(args.file)
    e = _expr(src, args.expr)
    return to_diagram(e, _order(e, args.lower, "lower"), _order(e, args.upper, "upper"))


def cmd_dot(args, out):
    out.write(to_dot(_diagram(args)))
    return EXIT_OK


def cmd_json(args, out):
    out.write(diagram_json(_diagram(args)))
    return EXIT_OK


def _names(labels) -> str:
    return "[" + ",".join(l.name if isinstance(l, Label) else str(l) for l in sorted(labels)) + "]"


def cmd_check(args, out):
    src = _load(args.file)
    for e in src.expressions.values():
        src.alphabet.check(e)
    v = src.valuation()
    for name, e in src.expressions.items():
        out.write(
            f"{name}: ok lower={_names(e.free_lower)} upper={_names(e.free_upper)} "
            f"factors={len(e.factors)}\n"
        )
    unbound = [n for n in src.alphabet.declarations if n not in v.tensors]
    out.write(
        f"types={len(src.types)} symbols={len(src.alphabet.declarations)} "
        f"expressions={len(src.expressions)} bound={len(v.tensors)} unbound={len(unbound)}\n"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="abstensor", description="Abstract tensor expressions and string diagrams.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    r = sub.add_parser("reduce", help="print the canonical reduced form of an expression")
    r.add_argument("file")
    r.add_argument("--expr", required=True)
    r.set_defaults(func=cmd_reduce)

    q = sub.add_parser("eq", help="decide equivalence; exit 0 iff equivalent")
    q.add_argument("file")
    q.add_argument("--left", required=True)
    q.add_argument("--right", required=True)
    q.add_argument("--oracle", action="store_true", help="cross-check with the brute-force oracle")
    q.add_argument("--max-factors", type=int, default=6)
    q.add_argument("--max-bound", type=int, default=8)
    q.set_defaults(func=cmd_eq)

    ev = sub.add_parser("eval", help="evaluate an expression under the file's dims and bindings")
    ev.add_argument("file")
    ev.add_argument("--expr", required=True)
    ev.add_argument("--lower")
    ev.add_argument("--upper")
    ev.set_defaults(func=cmd_eval)

    for name, func, helptext in (
        ("dot", cmd_dot, "print the string diagram as Graphviz DOT"),
        ("json", cmd_json, "print the string diagram as JSON"),
    ):
        d = sub.add_parser(name, help=helptext)
        d.add_argument("file")
        d.add_argument("--expr", required=True)
        d.add_argument("--lower")
        d.add_argument("--upper")
        d.set_defaults(func=func)

    c = sub.add_parser("check", help="validate every declaration in a file")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except CliError as err:
        return _report(err)
    except SourceError as err:
        where = {"line": err.line, "column": err.column} if err.line else {}
        return _report(CliError(err.kind, err.code, err.message, **where))
    except TensorError as err:
        return _report(CliError("type", EXIT_TYPE, str(err)))


if __name__ == "__main__":
    sys.exit(main())
