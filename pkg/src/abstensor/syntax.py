"""Text format for alphabets, expressions and tensor bindings.

::

    file  := decl*
    decl  := "type" NAME ("," NAME)* ";"
           | "dim" NAME "=" NAT ";"
           | "sym" NAME ":" types "->" types ";"
           | "expr" NAME "=" term+ ";"
           | "bind" NAME "=" JSON ";"
    term  := NAME "_{" labels "}" "^{" labels "}"
           | "delta_{" label "}^{" label "}"
           | "1"
    label := NAME (":" NAME)?

``#`` starts a comment.  Labels take their types from the symbol signature
or from an inline ``:Type``; delta labels may also inherit the type of
another occurrence.  The ``\\_`` prefix is reserved for generated labels.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    RESERVED,
    Alphabet,
    Delta,
    EinsteinExpression,
    Label,
    TensorError,
    TensorSymbol,
    TypeName,
)
from .valuation import ConcreteTensor, Signature, Valuation


class SourceError(Exception):
    code = 3
    kind = "parse"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self):
        return f"{self.line}:{self.column}: {self.message}"


class ParseError(SourceError):
    pass


class CheckError(SourceError):
    """Well-formed syntax that fails typing or the label discipline."""

    code = 4
    kind = "type"


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<sub>_\{)
  | (?P<sup>\^\{)
  | (?P<arrow>->)
  | (?P<name>[A-Za-z_](?:[A-Za-z0-9]|_(?!\{))*)
  | (?P<nat>\d+)
  | (?P<punct>[,;:=}])
    """,
    re.VERBOSE,
)

KEYWORDS = {"type", "dim", "sym", "expr", "bind"}


@dataclass
class Token:
    kind: str
    text: str
    pos: int


@dataclass
class SourceFile:
    types: tuple[TypeName, ...] = ()
    alphabet: Alphabet = field(default_factory=Alphabet)
    expressions: dict[str, EinsteinExpression] = field(default_factory=dict)
    dims: dict[TypeName, int] = field(default_factory=dict)
    bindings: dict[str, ConcreteTensor] = field(default_factory=dict)
    where: dict[str, tuple[int, int]] = field(default_factory=dict)

    @property
    def signature(self) -> Signature:
        return Signature.from_alphabet(self.alphabet, self.types)

    def valuation(self) -> Valuation:
        v = Valuation(dict(self.dims), dict(self.bindings))
        try:
            v.check(self.signature)
        except TensorError as exc:
            raise CheckError(str(exc)) from None
        return v

    def expression(self, name: str) -> EinsteinExpression:
        try:
            return self.expressions[name]
        except KeyError:
            raise KeyError(f"no expression named {name}") from None


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.peeked: Token | None = None

    def where(self, pos: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def fail(self, message: str, pos: int | None = None, cls=ParseError):
        raise cls(message, *self.where(self.pos if pos is None else pos))

    def _lex(self) -> Token:
        while True:
            if self.pos >= len(self.text):
                return Token("eof", "", self.pos)
            if self.text.startswith(RESERVED, self.pos):
                self.fail("labels starting with \\_ are reserved for generated labels")
            m = _TOKEN.match(self.text, self.pos)
            if not m:
                self.fail(f"unexpected character {self.text[self.pos]!r}")
            start = self.pos
            self.pos = m.end()
            if m.lastgroup != "ws":
                return Token(m.lastgroup, m.group(), start)

    def peek(self) -> Token:
        if self.peeked is None:
            self.peeked = self._lex()
        return self.peeked

    def next(self) -> Token:
        tok = self.peek()
        self.peeked = None
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = tok.text or "end of input"
            self.fail(f"expected {want!r}, got {got!r}", tok.pos)
        return tok

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        return None

    # -- grammar --

    def parse(self) -> SourceFile:
        src = SourceFile()
        types: list[TypeName] = []
        decls: dict[str, tuple] = {}
        raw_exprs = []
        while self.peek().kind != "eof":
            kw = self.expect("name")
            if kw.text == "type":
                while True:
                    t = self.expect("name")
                    if t.text in types:
                        self.fail(f"type {t.text} declared twice", t.pos, CheckError)
                    types.append(t.text)
                    if not self.accept("punct", ","):
                        break
            elif kw.text == "dim":
                t = self.expect("name")
                self._check_type(t, types)
                self.expect("punct", "=")
                n = self.expect("nat")
                if int(n.text) < 1:
                    self.fail("dimensions must be positive", n.pos, CheckError)
                src.dims[t.text] = int(n.text)
            elif kw.text == "sym":
                name = self.expect("name")
                if name.text in decls or name.text == "delta":
                    self.fail(f"symbol {name.text} cannot be declared here", name.pos, CheckError)
                self.expect("punct", ":")
                ins = self._typelist(types)
                self.expect("arrow")
                outs = self._typelist(types)
                decls[name.text] = (tuple(ins), tuple(outs))
            elif kw.text == "expr":
                name = self.expect("name")
                if name.text in src.where:
                    self.fail(f"expression {name.text} defined twice", name.pos, CheckError)
                src.where[name.text] = self.where(name.pos)
                self.expect("punct", "=")
                terms = [self._term()]
                while self.peek().kind != "punct" or self.peek().text != ";":
                    terms.append(self._term())
                raw_exprs.append((name, terms))
            elif kw.text == "bind":
                name = self.expect("name")
                self.expect("punct", "=")
                if self.peeked is not None:
                    self.fail("internal lexer state", name.pos)
                start = self.pos
                while start < len(self.text) and self.text[start] in " \t\r\n":
                    start += 1
                try:
                    obj, end = json.JSONDecoder().raw_decode(self.text, start)
                except json.JSONDecodeError as exc:
                    self.fail(f"bad JSON tensor literal: {exc.msg}", start + 0)
                self.pos = end
                if name.text not in decls:
                    self.fail(f"binding for undeclared symbol {name.text}", name.pos, CheckError)
                try:
                    src.bindings[name.text] = ConcreteTensor.from_obj(obj)
                except (ValueError, ZeroDivisionError, TypeError) as exc:
                    self.fail(f"bad tensor literal: {exc}", start, CheckError)
            else:
                self.fail(f"unknown declaration {kw.text!r}", kw.pos)
            self.expect("punct", ";")
        src.types = tuple(types)
        src.alphabet = Alphabet(decls)
        for name, terms in raw_exprs:
            src.expressions[name.text] = self._build(name, terms, decls, types)
        return src

    def _check_type(self, tok: Token, types) -> None:
        if tok.text not in types:
            self.fail(f"undeclared type {tok.text}", tok.pos, CheckError)

    def _typelist(self, types) -> list[TypeName]:
        out = []
        if self.peek().kind != "name":
            return out
        while True:
            t = self.expect("name")
            self._check_type(t, types)
            out.append(t.text)
            if not self.accept("punct", ","):
                return out

    def _labels(self):
        out = []
        if self.accept("punct", "}"):
            return out
        while True:
            name = self.expect("name")
            typ = None
            if self.accept("punct", ":"):
                typ = self.expect("name")
            out.append((name, typ))
            if self.accept("punct", "}"):
                return out
            self.expect("punct", ",")

    def _term(self):
        tok = self.next()
        if tok.kind == "nat" and tok.text == "1":
            return None
        if tok.kind != "name":
            self.fail(f"expected a term, got {tok.text or 'end of input'!r}", tok.pos)
        self.expect("sub")
        lower = self._labels()
        self.expect("sup")
        upper = self._labels()
        if tok.text == "delta" and (len(lower) != 1 or len(upper) != 1):
            self.fail("delta takes exactly one lower and one upper label", tok.pos)
        return tok, lower, upper

    def _build(self, name: Token, terms, decls, types) -> EinsteinExpression:
        terms = [t for t in terms if t is not None]
        label_type: dict[str, TypeName] = {}

        def assign(label_tok: Token, t: TypeName):
            old = label_type.setdefault(label_tok.text, t)
            if old != t:
                self.fail(f"label {label_tok.text} used at types {old} and {t}", label_tok.pos, CheckError)

        for head, lower, upper in terms:
            for lab, typ in lower + upper:
                if typ is not None:
                    self._check_type(typ, types)
                    assign(lab, typ.text)
            if head.text == "delta":
                continue
            if head.text not in decls:
                self.fail(f"undeclared symbol {head.text}", head.pos, CheckError)
            ins, outs = decls[head.text]
            if len(lower) != len(ins) or len(upper) != len(outs):
                self.fail(
                    f"{head.text} takes {len(ins)} lower and {len(outs)} upper labels, "
                    f"got {len(lower)} and {len(upper)}",
                    head.pos, CheckError,
                )
            for (lab, _), t in list(zip(lower, ins)) + list(zip(upper, outs)):
                assign(lab, t)
        changed = True
        while changed:
            changed = False
            for head, lower, upper in terms:
                if head.text != "delta":
                    continue
                (a, _), (b, _) = lower[0], upper[0]
                ta, tb = label_type.get(a.text), label_type.get(b.text)
                if ta and not tb:
                    assign(b, ta)
                    changed = True
                elif tb and not ta:
                    assign(a, tb)
                    changed = True
                elif ta and tb and ta != tb:
                    self.fail(f"delta joins types {ta} and {tb}", head.pos, CheckError)
        factors = []
        for head, lower, upper in terms:
            for lab, _ in lower + upper:
                if lab.text not in label_type:
                    self.fail(f"cannot infer the type of label {lab.text}", lab.pos, CheckError)
            lo = tuple(Label(l.text, label_type[l.text]) for l, _ in lower)
            up = tuple(Label(l.text, label_type[l.text]) for l, _ in upper)
            try:
                factors.append(Delta(lo[0], up[0]) if head.text == "delta" else TensorSymbol(head.text, lo, up))
            except TensorError as exc:
                self.fail(str(exc), head.pos, CheckError)
        try:
            return EinsteinExpression(tuple(factors))
        except TensorError as exc:
            self.fail(f"in expression {name.text}: {exc}", name.pos, CheckError)


def parse(text: str) -> SourceFile:
    return _Parser(text).parse()


# -- printing ----------------------------------------------------------------


def _printable(l: Label) -> bool:
    return l.name is not None and not l.is_reserved


def readable(e: EinsteinExpression) -> EinsteinExpression:
    """Rename generated bound labels to parseable names ``k1, k2, ...``.

    Only bound labels are renamed, so the result is equivalent to ``e``.
    """
    taken = {l.name for l in e.labels if l.name is not None}
    rename, n = {}, 0
    for f in e.factors:
        for l in (f.lower, f.upper) if isinstance(f, Delta) else f.lower + f.upper:
            if l in e.bound and not _printable(l) and l not in rename:
                n += 1
                while f"k{n}" in taken:
                    n += 1
                rename[l] = Label(f"k{n}", l.type)
    return e.rename(rename, rename) if rename else e


def format_label(l: Label, typed: bool = False) -> str:
    return f"{l}:{l.type}" if typed else str(l)


def format_expression(e: EinsteinExpression) -> str:
    """Text of ``e`` that :func:`parse` reads back (given the symbol declarations).

    Delta labels carry inline types; free labels from the reserved namespace
    are printed as-is and are not parseable.
    """
    e = readable(e)
    if not e.factors:
        return "1"
    terms = []
    for f in e.factors:
        if isinstance(f, Delta):
            terms.append(f"delta_{{{format_label(f.lower, True)}}}^{{{format_label(f.upper, True)}}}")
        else:
            lo = ",".join(map(format_label, f.lower))
            up = ",".join(map(format_label, f.upper))
            terms.append(f"{f.name}_{{{lo}}}^{{{up}}}")
    return " ".join(terms)


def format_source(types, alphabet: Alphabet, expressions: dict[str, EinsteinExpression]) -> str:
    lines = []
    if types:
        lines.append(f"type {', '.join(types)};")
    for name, (ins, outs) in alphabet.declarations.items():
        lines.append(f"sym {name} : {', '.join(ins)} -> {', '.join(outs)};".replace(":  ->", ": ->"))
    for name, e in expressions.items():
        lines.append(f"expr {name} = {format_expression(e)};")
    return "\n".join(lines) + "\n"


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"
