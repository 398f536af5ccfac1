"""Typed labels, tensor symbols and Einstein expressions.

Everything here is an immutable value.  Expressions are raw syntax: the
equivalence relation on them lives in :mod:`abstensor.normal_form`.
"""
from __future__ import annotations

import functools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

TypeName = str

#: Prefix of the label namespace reserved for generated labels.  The text
#: parser rejects it, so user labels never collide with supply output.
RESERVED = "\\_"


class TensorError(ValueError):
    """Base class for ill-formed tensor data."""


class LabelDisciplineError(TensorError):
    pass


class TypeMismatchError(TensorError):
    pass


class LabelClashError(TensorError):
    def __init__(self, message: str, labels: Iterable["Label"] = ()):
        super().__init__(message)
        self.labels = tuple(sorted(labels))


@functools.total_ordering
@dataclass(frozen=True, eq=True)
class Label:
    """A typed index name.

    Named labels carry text; canonical labels (``name is None``) are the
    triples (type, position, polarity) used for the ordered inputs
    (polarity 0) and outputs (polarity 1) of morphisms.
    """

    name: str | None
    type: TypeName
    position: int = 0
    polarity: int = 0

    def __post_init__(self):
        if self.name is None:
            if self.position < 1 or self.polarity not in (0, 1):
                raise ValueError(f"bad canonical label {self!r}")
        elif not self.name:
            raise ValueError("empty label name")
        if not self.type:
            raise ValueError("empty type name")

    @classmethod
    def canonical(cls, type: TypeName, position: int, polarity: int) -> "Label":
        return cls(None, type, position, polarity)

    @property
    def is_canonical(self) -> bool:
        return self.name is None

    @property
    def is_reserved(self) -> bool:
        return self.name is not None and self.name.startswith(RESERVED)

    def sort_key(self) -> tuple:
        if self.name is None:
            return (0, self.type, self.position, self.polarity)
        return (1, self.name, self.type)

    def __lt__(self, other: "Label") -> bool:
        if not isinstance(other, Label):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.name is None:
            return f"\\{self.type}[{self.position}]{'^' if self.polarity else '_'}"
        return self.name

    def __repr__(self) -> str:
        if self.name is None:
            return f"Label.canonical({self.type!r}, {self.position}, {self.polarity})"
        return f"Label({self.name!r}, {self.type!r})"


@dataclass(frozen=True)
class TensorSymbol:
    """A relabelled alphabet symbol ``name_{lower}^{upper}``.

    Labels are distinct within each side.  The same label may appear once
    below and once above, which is a loop from an output back into an input
    of the same box.
    """

    name: str
    lower: tuple[Label, ...]
    upper: tuple[Label, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(self.lower))
        object.__setattr__(self, "upper", tuple(self.upper))
        for side in (self.lower, self.upper):
            if len(set(side)) != len(side):
                raise LabelDisciplineError(f"repeated label on one side of {self.name}")

    @property
    def in_types(self) -> tuple[TypeName, ...]:
        return tuple(l.type for l in self.lower)

    @property
    def out_types(self) -> tuple[TypeName, ...]:
        return tuple(l.type for l in self.upper)

    def rename(self, lower: Mapping[Label, Label], upper: Mapping[Label, Label]) -> "TensorSymbol":
        return TensorSymbol(
            self.name,
            tuple(lower.get(l, l) for l in self.lower),
            tuple(upper.get(l, l) for l in self.upper),
        )


@dataclass(frozen=True)
class Delta:
    """The identity wire ``delta_{lower}^{upper}``; a circle when both agree."""

    lower: Label
    upper: Label

    def __post_init__(self):
        if self.lower.type != self.upper.type:
            raise TypeMismatchError(
                f"delta between {self.lower} : {self.lower.type} and {self.upper} : {self.upper.type}"
            )

    @property
    def is_circle(self) -> bool:
        return self.lower == self.upper

    def rename(self, lower: Mapping[Label, Label], upper: Mapping[Label, Label]) -> "Delta":
        return Delta(lower.get(self.lower, self.lower), upper.get(self.upper, self.upper))


Factor = Union[TensorSymbol, Delta]


def _lowers(f: Factor) -> tuple[Label, ...]:
    return f.lower if isinstance(f, TensorSymbol) else (f.lower,)


def _uppers(f: Factor) -> tuple[Label, ...]:
    return f.upper if isinstance(f, TensorSymbol) else (f.upper,)


@dataclass(frozen=True)
class EinsteinExpression:
    """A list of tensor symbols and deltas obeying the label discipline.

    Every label occurs once, or exactly twice with one lower and one upper
    occurrence of the same type.  The empty expression is the unit scalar.
    """

    factors: tuple[Factor, ...] = ()
    _free_lower: frozenset = field(init=False, repr=False, compare=False)
    _free_upper: frozenset = field(init=False, repr=False, compare=False)
    _bound: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        lower, upper = Counter(), Counter()
        for f in self.factors:
            if not isinstance(f, (TensorSymbol, Delta)):
                raise TypeError(f"not a factor: {f!r}")
            lower.update(_lowers(f))
            upper.update(_uppers(f))
        for side, counts in (("lower", lower), ("upper", upper)):
            dup = sorted(l for l, n in counts.items() if n > 1)
            if dup:
                raise LabelDisciplineError(
                    f"label(s) {', '.join(map(str, dup))} occur more than once in {side} position"
                )
        by_name: dict[str, TypeName] = {}
        for l in list(lower) + list(upper):
            if l.name is not None and by_name.setdefault(l.name, l.type) != l.type:
                raise TypeMismatchError(f"label {l} used with types {by_name[l.name]} and {l.type}")
        bound = frozenset(lower) & frozenset(upper)
        object.__setattr__(self, "_bound", bound)
        object.__setattr__(self, "_free_lower", frozenset(lower) - bound)
        object.__setattr__(self, "_free_upper", frozenset(upper) - bound)

    def __iter__(self):
        return iter(self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    @property
    def free_lower(self) -> frozenset:
        return self._free_lower

    @property
    def free_upper(self) -> frozenset:
        return self._free_upper

    @property
    def free(self) -> frozenset:
        return self._free_lower | self._free_upper

    @property
    def bound(self) -> frozenset:
        return self._bound

    @property
    def labels(self) -> frozenset:
        return self._free_lower | self._free_upper | self._bound

    @property
    def symbols(self) -> tuple[TensorSymbol, ...]:
        return tuple(f for f in self.factors if isinstance(f, TensorSymbol))

    @property
    def deltas(self) -> tuple[Delta, ...]:
        return tuple(f for f in self.factors if isinstance(f, Delta))

    def rename(self, lower: Mapping[Label, Label], upper: Mapping[Label, Label]) -> "EinsteinExpression":
        """Rename lower occurrences by ``lower`` and upper ones by ``upper``."""
        return EinsteinExpression(tuple(f.rename(lower, upper) for f in self.factors))


EMPTY = EinsteinExpression(())


def expression(*factors: Factor) -> EinsteinExpression:
    return EinsteinExpression(tuple(factors))


def free_labels(e: EinsteinExpression) -> tuple[frozenset, frozenset]:
    """Return ``(free lower, free upper)`` of ``e``."""
    return e.free_lower, e.free_upper


def validate(e: EinsteinExpression) -> EinsteinExpression:
    """Re-check the label discipline from scratch and return ``e``."""
    return EinsteinExpression(e.factors)


@dataclass(frozen=True)
class Alphabet:
    """Symbol declarations ``name : in types -> out types``."""

    declarations: Mapping[str, tuple[tuple[TypeName, ...], tuple[TypeName, ...]]] = field(default_factory=dict)

    def __post_init__(self):
        decls = {
            name: (tuple(ins), tuple(outs))
            for name, (ins, outs) in sorted(dict(self.declarations).items())
        }
        if "delta" in decls:
            raise ValueError("'delta' is reserved")
        object.__setattr__(self, "declarations", decls)

    def __hash__(self):
        return hash(tuple(self.declarations.items()))

    def __contains__(self, name: str) -> bool:
        return name in self.declarations

    def __getitem__(self, name: str):
        return self.declarations[name]

    @property
    def types(self) -> tuple[TypeName, ...]:
        seen = set()
        for ins, outs in self.declarations.values():
            seen.update(ins)
            seen.update(outs)
        return tuple(sorted(seen))

    def check(self, e: EinsteinExpression) -> None:
        for sym in e.symbols:
            if sym.name not in self.declarations:
                raise TypeMismatchError(f"undeclared symbol {sym.name}")
            ins, outs = self.declarations[sym.name]
            if (sym.in_types, sym.out_types) != (ins, outs):
                raise TypeMismatchError(
                    f"{sym.name} used at {list(sym.in_types)} -> {list(sym.out_types)}, "
                    f"declared {list(ins)} -> {list(outs)}"
                )


@dataclass(frozen=True)
class LabelSupply:
    """Deterministic source of fresh labels ``\\_<Type><n>``.

    The supply is a value: :meth:`fresh` returns the label and the advanced
    supply.  :meth:`avoiding` bumps the counters past every reserved label
    already present in the given expressions or labels.
    """

    counters: tuple[tuple[TypeName, int], ...] = ()

    def next_index(self, t: TypeName) -> int:
        return dict(self.counters).get(t, 0) + 1

    def fresh(self, t: TypeName) -> tuple[Label, "LabelSupply"]:
        n = self.next_index(t)
        counters = dict(self.counters)
        counters[t] = n
        sep = "." if t[-1].isdigit() else ""
        return Label(f"{RESERVED}{t}{sep}{n}", t), LabelSupply(tuple(sorted(counters.items())))

    def fresh_many(self, types: Iterable[TypeName]) -> tuple[list[Label], "LabelSupply"]:
        out, s = [], self
        for t in types:
            l, s = s.fresh(t)
            out.append(l)
        return out, s

    def avoiding(self, *things) -> "LabelSupply":
        counters = dict(self.counters)
        for thing in things:
            labels = thing.labels if isinstance(thing, EinsteinExpression) else thing
            for l in labels:
                if not l.is_reserved:
                    continue
                prefix = f"{RESERVED}{l.type}"
                tail = l.name[len(prefix):].removeprefix(".")
                if l.name.startswith(prefix) and tail.isdigit():
                    counters[l.type] = max(counters.get(l.type, 0), int(tail))
        return LabelSupply(tuple(sorted(counters.items())))


def fresh(s: LabelSupply, t: TypeName) -> tuple[Label, LabelSupply]:
    return s.fresh(t)


def _supply(s: LabelSupply | None, *things) -> LabelSupply:
    return (s or LabelSupply()).avoiding(*things)


# -- free abstract tensor system operations ---------------------------------


def delta(a: Label, b: Label) -> EinsteinExpression:
    """``delta_a^b``; ``delta(a, a)`` is a circle of type ``a.type``."""
    return EinsteinExpression((Delta(a, b),))


def _key(l: Label):
    """What two labels of one expression must not share: the name, or the
    whole triple for canonical labels."""
    return l.name if l.name is not None else (l.type, l.position, l.polarity)


def _meeting(xs: Iterable[Label], ys: Iterable[Label]) -> list[Label]:
    """Labels of ``xs`` whose key also occurs in ``ys``."""
    keys = {_key(y) for y in ys}
    return sorted(x for x in xs if _key(x) in keys)


def product(e1: EinsteinExpression, e2: EinsteinExpression, s: LabelSupply | None = None) -> EinsteinExpression:
    """Juxtapose two expressions whose free labels are disjoint.

    Bound labels that clash with the other operand are renamed fresh first.
    """
    clash = _meeting(e1.free, e2.free)
    if clash:
        raise LabelClashError(
            f"free labels shared by both operands: {', '.join(map(str, sorted(clash)))}", clash
        )
    s = _supply(s, e1, e2)
    ren2 = {}
    for l in _meeting(e2.bound, e1.labels):
        ren2[l], s = s.fresh(l.type)
    if ren2:
        e2 = e2.rename(ren2, ren2)
    ren1 = {}
    for l in _meeting(e1.bound, e2.labels):
        ren1[l], s = s.fresh(l.type)
    if ren1:
        e1 = e1.rename(ren1, ren1)
    return EinsteinExpression(e1.factors + e2.factors)


def contract(e: EinsteinExpression, a: Label, b: Label) -> EinsteinExpression:
    """Join free lower ``a`` with free upper ``b`` by renaming ``b`` to ``a``."""
    if a not in e.free_lower:
        raise LabelDisciplineError(f"{a} is not a free lower label")
    if b not in e.free_upper:
        raise LabelDisciplineError(f"{b} is not a free upper label")
    if a.type != b.type:
        raise TypeMismatchError(f"cannot contract {a} : {a.type} with {b} : {b.type}")
    return e.rename({}, {b: a})


def relabel(e: EinsteinExpression, f: Mapping[Label, Label], s: LabelSupply | None = None) -> EinsteinExpression:
    """Rename free labels by the injective, type-preserving map ``f``.

    Bound labels that would collide with the image of ``f`` are replaced by
    fresh labels.
    """
    f = {k: v for k, v in dict(f).items()}
    extra = set(f) - e.free
    if extra:
        raise LabelDisciplineError(f"relabelling not free labels: {', '.join(map(str, sorted(extra)))}")
    if len(set(f.values())) != len(f):
        raise LabelClashError("relabelling is not injective", f.values())
    for k, v in f.items():
        if k.type != v.type:
            raise TypeMismatchError(f"relabelling {k} : {k.type} to {v} : {v.type}")
    untouched = e.free - set(f)
    clash = _meeting(untouched, f.values())
    if clash:
        raise LabelClashError(
            f"relabelling onto untouched free labels: {', '.join(map(str, sorted(clash)))}", clash
        )
    s = _supply(s, e, f.values())
    full = dict(f)
    for l in _meeting(e.bound, f.values()):
        full[l], s = s.fresh(l.type)
    return e.rename(full, full)
