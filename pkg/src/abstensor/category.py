"""The strict traced symmetric monoidal category of the free tensor system.

Objects are lists of types.  A morphism ``X -> Y`` is a canonical free tensor
whose free lower labels are the canonical input labels ``(X[i], i+1, 0)`` and
whose free upper labels are the canonical output labels ``(Y[j], j+1, 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import (
    Alphabet,
    EinsteinExpression,
    Label,
    LabelClashError,
    LabelDisciplineError,
    LabelSupply,
    TensorSymbol,
    TypeMismatchError,
    TypeName,
    contract,
    delta,
    product,
    relabel,
)
from .normal_form import FreeTensor, canonical

ObjectList = tuple[TypeName, ...]


class ObjectMismatchError(TypeMismatchError):
    pass


def inputs(xs: Sequence[TypeName], offset: int = 0) -> list[Label]:
    return [Label.canonical(t, offset + i + 1, 0) for i, t in enumerate(xs)]


def outputs(ys: Sequence[TypeName], offset: int = 0) -> list[Label]:
    return [Label.canonical(t, offset + j + 1, 1) for j, t in enumerate(ys)]


@dataclass(frozen=True)
class Morphism:
    dom: ObjectList
    cod: ObjectList
    body: FreeTensor

    def __post_init__(self):
        object.__setattr__(self, "dom", tuple(self.dom))
        object.__setattr__(self, "cod", tuple(self.cod))
        if self.body.free_lower != frozenset(inputs(self.dom)):
            raise LabelDisciplineError("free lower labels are not the canonical inputs of dom")
        if self.body.free_upper != frozenset(outputs(self.cod)):
            raise LabelDisciplineError("free upper labels are not the canonical outputs of cod")

    @classmethod
    def from_expression(
        cls,
        e: EinsteinExpression,
        lower_order: Sequence[Label],
        upper_order: Sequence[Label],
        s: LabelSupply | None = None,
    ) -> "Morphism":
        """Read ``e`` as a morphism with inputs and outputs in the given label order."""
        if set(lower_order) != e.free_lower or len(lower_order) != len(e.free_lower):
            raise LabelDisciplineError("lower order must enumerate the free lower labels")
        if set(upper_order) != e.free_upper or len(upper_order) != len(e.free_upper):
            raise LabelDisciplineError("upper order must enumerate the free upper labels")
        dom = tuple(l.type for l in lower_order)
        cod = tuple(l.type for l in upper_order)
        f = dict(zip(lower_order, inputs(dom)))
        f.update(zip(upper_order, outputs(cod)))
        return cls(dom, cod, canonical(relabel(e, f, s)))

    @classmethod
    def generator(cls, alphabet: Alphabet, name: str) -> "Morphism":
        """The one-symbol morphism of an alphabet symbol (the unit of the free construction)."""
        ins, outs = alphabet[name]
        sym = TensorSymbol(name, tuple(inputs(ins)), tuple(outputs(outs)))
        return cls(ins, outs, canonical(EinsteinExpression((sym,))))

    def expression(self) -> EinsteinExpression:
        return self.body.expression()


def _morphism(dom, cod, e: EinsteinExpression) -> Morphism:
    return Morphism(tuple(dom), tuple(cod), canonical(e))


def identity(xs: Sequence[TypeName]) -> Morphism:
    xs = tuple(xs)
    e = EinsteinExpression(tuple(
        f for a, b in zip(inputs(xs), outputs(xs)) for f in delta(a, b).factors
    ))
    return _morphism(xs, xs, e)


def symmetry(xs: Sequence[TypeName], ys: Sequence[TypeName]) -> Morphism:
    """The crossing ``X Y -> Y X``."""
    xs, ys = tuple(xs), tuple(ys)
    m, n = len(xs), len(ys)
    factors = []
    for a, b in zip(inputs(xs), outputs(xs, offset=n)):
        factors += delta(a, b).factors
    for a, b in zip(inputs(ys, offset=m), outputs(ys)):
        factors += delta(a, b).factors
    return _morphism(xs + ys, ys + xs, EinsteinExpression(tuple(factors)))


def permutation(xs: Sequence[TypeName], perm: Sequence[int]) -> Morphism:
    """The wiring sending input ``i`` to output ``perm[i]``; ``perm`` is a permutation."""
    xs = tuple(xs)
    if sorted(perm) != list(range(len(xs))):
        raise ValueError(f"not a permutation of {len(xs)}: {perm}")
    cod = [None] * len(xs)
    for i, j in enumerate(perm):
        cod[j] = xs[i]
    factors = []
    for i, j in enumerate(perm):
        factors += delta(Label.canonical(xs[i], i + 1, 0), Label.canonical(xs[i], j + 1, 1)).factors
    return _morphism(xs, cod, EinsteinExpression(tuple(factors)))


def compose(g: Morphism, f: Morphism, s: LabelSupply | None = None) -> Morphism:
    """``g . f``: first ``f`` then ``g``."""
    if f.cod != g.dom:
        raise ObjectMismatchError(f"cannot compose {list(f.cod)} with {list(g.dom)}")
    ef, eg = f.expression(), g.expression()
    s = (s or LabelSupply()).avoiding(ef, eg)
    ups, s = s.fresh_many(f.cod)
    downs, s = s.fresh_many(g.dom)
    ef = relabel(ef, dict(zip(outputs(f.cod), ups)), s)
    eg = relabel(eg, dict(zip(inputs(g.dom), downs)), s)
    e = product(ef, eg, s)
    for a, b in zip(downs, ups):
        e = contract(e, a, b)
    return _morphism(f.dom, g.cod, e)


def mtensor(f: Morphism, g: Morphism, s: LabelSupply | None = None) -> Morphism:
    """Monoidal product: ``g``'s canonical positions shift past ``f``'s."""
    ef, eg = f.expression(), g.expression()
    shift = dict(zip(inputs(g.dom), inputs(g.dom, offset=len(f.dom))))
    shift.update(zip(outputs(g.cod), outputs(g.cod, offset=len(f.cod))))
    eg = relabel(eg, shift, s)
    return _morphism(f.dom + g.dom, f.cod + g.cod, product(ef, eg, s))


def trace(f: Morphism, xs: Sequence[TypeName], s: LabelSupply | None = None) -> Morphism:
    """Trace out the trailing block ``xs`` of both ``dom`` and ``cod``."""
    xs = tuple(xs)
    k = len(xs)
    if k > len(f.dom) or k > len(f.cod) or f.dom[len(f.dom) - k:] != xs or f.cod[len(f.cod) - k:] != xs:
        raise ObjectMismatchError(f"{list(xs)} is not a common suffix of {list(f.dom)} and {list(f.cod)}")
    m, n = len(f.dom) - k, len(f.cod) - k
    e = f.expression()
    s = (s or LabelSupply()).avoiding(e)
    loop, s = s.fresh_many(xs)
    ins = inputs(xs, offset=m)
    outs = outputs(xs, offset=n)
    e = relabel(e, dict(zip(ins, loop)), s)
    for a, b in zip(loop, outs):
        e = contract(e, a, b)
    return _morphism(f.dom[:m], f.cod[:n], e)


def block_to_end(xs: Sequence[TypeName], i: int) -> Morphism:
    """The symmetry moving position ``i`` of ``xs`` to the end.

    Built as a composite of adjacent transpositions.
    """
    xs = list(xs)
    current = tuple(xs)
    result = identity(current)
    for p in range(i, len(xs) - 1):
        step = mtensor(
            mtensor(identity(current[:p]), symmetry(current[p:p + 1], current[p + 1:p + 2])),
            identity(current[p + 2:]),
        )
        result = compose(step, result)
        current = step.cod
    return result


def block_from_end(xs: Sequence[TypeName], i: int) -> Morphism:
    """Inverse of :func:`block_to_end`: moves the last object back to position ``i``."""
    xs = list(xs)
    moved = tuple(xs[:i] + xs[i + 1:] + [xs[i]])
    current = moved
    result = identity(current)
    for p in range(len(xs) - 2, i - 1, -1):
        step = mtensor(
            mtensor(identity(current[:p]), symmetry(current[p:p + 1], current[p + 1:p + 2])),
            identity(current[p + 2:]),
        )
        result = compose(step, result)
        current = step.cod
    return result


@dataclass(frozen=True)
class LabelledMorphism:
    """A morphism whose inputs and outputs are named by disjoint label lists."""

    base: Morphism
    in_labels: tuple[Label, ...]
    out_labels: tuple[Label, ...]

    def __post_init__(self):
        object.__setattr__(self, "in_labels", tuple(self.in_labels))
        object.__setattr__(self, "out_labels", tuple(self.out_labels))
        if len(self.in_labels) != len(self.base.dom) or len(self.out_labels) != len(self.base.cod):
            raise LabelDisciplineError("label lists do not match dom/cod lengths")
        every = self.in_labels + self.out_labels
        if len(set(every)) != len(every):
            raise LabelClashError("labelling lists are not disjoint", every)
        for l, t in zip(every, self.base.dom + self.base.cod):
            if l.type != t:
                raise TypeMismatchError(f"label {l} : {l.type} labels an object of type {t}")

    @classmethod
    def from_expression(cls, e: EinsteinExpression, in_labels, out_labels) -> "LabelledMorphism":
        return cls(Morphism.from_expression(e, in_labels, out_labels), in_labels, out_labels)

    def tensor(self, s: LabelSupply | None = None) -> EinsteinExpression:
        """The corresponding free tensor ``psi_{in labels}^{out labels}``."""
        f = dict(zip(inputs(self.base.dom), self.in_labels))
        f.update(zip(outputs(self.base.cod), self.out_labels))
        return relabel(self.base.expression(), f, s)


def trace_contraction(f: LabelledMorphism, i: Label, j: Label, s: LabelSupply | None = None) -> LabelledMorphism:
    """Trace input ``i`` against output ``j`` after moving both to the end."""
    if i not in f.in_labels:
        raise LabelDisciplineError(f"{i} is not an input label")
    if j not in f.out_labels:
        raise LabelDisciplineError(f"{j} is not an output label")
    if i.type != j.type:
        raise TypeMismatchError(f"cannot contract {i} : {i.type} with {j} : {j.type}")
    pi, pj = f.in_labels.index(i), f.out_labels.index(j)
    dom, cod = f.base.dom, f.base.cod
    moved = compose(block_to_end(cod, pj), compose(f.base, block_from_end(dom, pi), s), s)
    traced = trace(moved, (i.type,), s)
    return LabelledMorphism(
        traced,
        f.in_labels[:pi] + f.in_labels[pi + 1:],
        f.out_labels[:pj] + f.out_labels[pj + 1:],
    )


def labelled_tensor(parts: Sequence[LabelledMorphism]) -> LabelledMorphism:
    if not parts:
        return LabelledMorphism(identity(()), (), ())
    base, ins, outs = parts[0].base, parts[0].in_labels, parts[0].out_labels
    for p in parts[1:]:
        base = mtensor(base, p.base)
        ins, outs = ins + p.in_labels, outs + p.out_labels
    return LabelledMorphism(base, ins, outs)


def cnf(parts: Sequence[LabelledMorphism], pairs: Sequence[tuple[Label, Label]]) -> LabelledMorphism:
    """``C_{i1}^{j1}(... C_{iP}^{jP}(f1 (x) ... (x) fM))``; the last pair is applied first."""
    every = [l for p in parts for l in p.in_labels + p.out_labels]
    if len(set(every)) != len(every):
        raise LabelClashError("parts share labels", every)
    ins = {l for p in parts for l in p.in_labels}
    outs = {l for p in parts for l in p.out_labels}
    used_i = [i for i, _ in pairs]
    used_j = [j for _, j in pairs]
    if len(set(used_i)) != len(used_i) or len(set(used_j)) != len(used_j):
        raise LabelDisciplineError("contraction indices must be distinct")
    for i, j in pairs:
        if i not in ins or j not in outs:
            raise LabelDisciplineError(f"dangling contraction pair ({i}, {j})")
    f = labelled_tensor(parts)
    for i, j in reversed(list(pairs)):
        f = trace_contraction(f, i, j)
    return f
