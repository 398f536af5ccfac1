"""Monoidal signatures, valuations and evaluation into concrete tensors.

Concrete tensors hold exact rationals (``fractions.Fraction``) in dense
object arrays whose axes are the lower indices followed by the upper ones.
Viewed as morphisms ``lower dims -> upper dims`` they form a strict traced
symmetric monoidal category; evaluation is the unique structure-preserving
functor out of the free category that agrees with a valuation on symbols.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .category import Morphism, inputs, outputs
from .core import (
    Alphabet,
    Delta,
    EinsteinExpression,
    Label,
    LabelSupply,
    TensorError,
    TensorSymbol,
    TypeMismatchError,
    TypeName,
)


class EvaluationError(TensorError):
    pass


@dataclass(frozen=True)
class Signature:
    """Objects plus morphism names with domain and codomain lists."""

    objects: frozenset
    morphisms: Mapping[str, tuple[tuple[TypeName, ...], tuple[TypeName, ...]]]

    def __post_init__(self):
        object.__setattr__(self, "objects", frozenset(self.objects))
        morphisms = {k: (tuple(d), tuple(c)) for k, (d, c) in sorted(dict(self.morphisms).items())}
        object.__setattr__(self, "morphisms", morphisms)
        for name, (d, c) in morphisms.items():
            if not set(d + c) <= self.objects:
                raise TypeMismatchError(f"{name} uses objects outside the signature")

    def __hash__(self):
        return hash((self.objects, tuple(self.morphisms.items())))

    @classmethod
    def from_alphabet(cls, alphabet: Alphabet, extra_types=()) -> "Signature":
        return cls(frozenset(alphabet.types) | frozenset(extra_types), alphabet.declarations)

    def alphabet(self) -> Alphabet:
        return Alphabet(self.morphisms)


@dataclass(frozen=True, eq=False)
class ConcreteTensor:
    lower: tuple[int, ...]
    upper: tuple[int, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        lower, upper = tuple(self.lower), tuple(self.upper)
        if any(d < 1 for d in lower + upper):
            raise ValueError("dimensions must be positive")
        entries = np.empty(lower + upper, dtype=object)
        src = np.asarray(self.entries, dtype=object)
        if src.size != entries.size:
            raise ValueError(f"{src.size} entries for dims {lower} / {upper}")
        entries.reshape(-1)[:] = [Fraction(x) for x in src.reshape(-1)]
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "entries", entries)

    def __eq__(self, other):
        if not isinstance(other, ConcreteTensor):
            return NotImplemented
        return (
            self.lower == other.lower
            and self.upper == other.upper
            and bool(np.all(self.entries == other.entries))
        )

    __hash__ = None

    def __repr__(self):
        return f"ConcreteTensor(lower={self.lower}, upper={self.upper}, entries={self.flat()})"

    def flat(self) -> list[Fraction]:
        return list(self.entries.reshape(-1))

    def scalar(self) -> Fraction:
        if self.lower or self.upper:
            raise ValueError("not a scalar")
        return self.entries[()]

    def to_json(self) -> str:
        return json.dumps({
            "lower": list(self.lower),
            "upper": list(self.upper),
            "entries": [f"{x.numerator}/{x.denominator}" for x in self.flat()],
        })

    @classmethod
    def from_obj(cls, obj) -> "ConcreteTensor":
        try:
            lower, upper, entries = obj["lower"], obj["upper"], obj["entries"]
        except (KeyError, TypeError):
            raise ValueError("tensor literal needs 'lower', 'upper' and 'entries'") from None
        return cls(tuple(lower), tuple(upper), [Fraction(str(x)) for x in entries])

    @classmethod
    def from_json(cls, text: str) -> "ConcreteTensor":
        return cls.from_obj(json.loads(text))


def _wrap(lower, upper, arr) -> ConcreteTensor:
    return ConcreteTensor(tuple(lower), tuple(upper), np.asarray(arr, dtype=object))


@dataclass(frozen=True)
class Valuation:
    """Dimensions per type and a concrete tensor per signature morphism."""

    dims: Mapping[TypeName, int]
    tensors: Mapping[str, ConcreteTensor] = field(default_factory=dict)

    def dim(self, t: TypeName) -> int:
        try:
            return self.dims[t]
        except KeyError:
            raise EvaluationError(f"no dimension for type {t}") from None

    def check(self, signature: Signature) -> None:
        for name, (d, c) in signature.morphisms.items():
            if name not in self.tensors:
                continue
            t = self.tensors[name]
            want = (tuple(self.dim(x) for x in d), tuple(self.dim(y) for y in c))
            if (t.lower, t.upper) != want:
                raise TypeMismatchError(
                    f"tensor for {name} has dims {list(t.lower)}/{list(t.upper)}, "
                    f"expected {list(want[0])}/{list(want[1])}"
                )


# -- the concrete traced symmetric monoidal category --------------------------


def cproduct(t: ConcreteTensor, u: ConcreteTensor) -> ConcreteTensor:
    outer = np.asarray(np.multiply.outer(t.entries, u.entries), dtype=object)
    # outer axes: t.lower t.upper u.lower u.upper -> t.lower u.lower t.upper u.upper
    tl, tu, ul = len(t.lower), len(t.upper), len(u.lower)
    axes = (
        list(range(tl))
        + list(range(tl + tu, tl + tu + ul))
        + list(range(tl, tl + tu))
        + list(range(tl + tu + ul, outer.ndim))
    )
    return _wrap(t.lower + u.lower, t.upper + u.upper, np.transpose(outer, axes))


def ccontract(t: ConcreteTensor, lower_pos: int, upper_pos: int) -> ConcreteTensor:
    """Sum the diagonal of lower axis ``lower_pos`` and upper axis ``upper_pos``."""
    if t.lower[lower_pos] != t.upper[upper_pos]:
        raise TypeMismatchError(
            f"cannot contract dimension {t.lower[lower_pos]} with {t.upper[upper_pos]}"
        )
    arr = np.trace(t.entries, axis1=lower_pos, axis2=len(t.lower) + upper_pos)
    lower = t.lower[:lower_pos] + t.lower[lower_pos + 1:]
    upper = t.upper[:upper_pos] + t.upper[upper_pos + 1:]
    return _wrap(lower, upper, arr)


def cdelta(d: int) -> ConcreteTensor:
    arr = np.array([[Fraction(int(i == j)) for j in range(d)] for i in range(d)], dtype=object)
    return _wrap((d,), (d,), arr)


def cscalar(x) -> ConcreteTensor:
    return _wrap((), (), np.array(Fraction(x), dtype=object))


def cidentity(dims: Sequence[int]) -> ConcreteTensor:
    out = cscalar(1)
    for d in dims:
        out = cproduct(out, cdelta(d))
    return out


def cpermutation(dims: Sequence[int], perm: Sequence[int]) -> ConcreteTensor:
    """Wiring sending input ``i`` to output ``perm[i]``."""
    ident = cidentity(dims)
    m = len(dims)
    axes = list(range(m)) + [0] * m
    for i, j in enumerate(perm):
        axes[m + j] = m + i
    cod = [0] * m
    for i, j in enumerate(perm):
        cod[j] = dims[i]
    return _wrap(dims, cod, np.transpose(ident.entries, axes))


def csymmetry(xdims: Sequence[int], ydims: Sequence[int]) -> ConcreteTensor:
    m, n = len(xdims), len(ydims)
    perm = [n + i for i in range(m)] + [j for j in range(n)]
    return cpermutation(tuple(xdims) + tuple(ydims), perm)


def ccompose(g: ConcreteTensor, f: ConcreteTensor) -> ConcreteTensor:
    """``g . f`` as a matrix product over ``f``'s outputs and ``g``'s inputs."""
    if f.upper != g.lower:
        raise TypeMismatchError(f"cannot compose dims {f.upper} with {g.lower}")
    k = len(f.upper)
    arr = np.tensordot(
        f.entries, g.entries,
        axes=(list(range(len(f.lower), len(f.lower) + k)), list(range(k))),
    )
    return _wrap(f.lower, g.upper, arr)


def ctrace(t: ConcreteTensor, k: int) -> ConcreteTensor:
    """Partial trace of the trailing ``k`` inputs against the trailing ``k`` outputs."""
    m, n = len(t.lower) - k, len(t.upper) - k
    if m < 0 or n < 0 or t.lower[m:] != t.upper[n:]:
        raise TypeMismatchError("trace block does not match")
    for _ in range(k):
        t = ccontract(t, len(t.lower) - 1, len(t.upper) - 1)
    return t


def cblock_to_end(dims: Sequence[int], i: int) -> ConcreteTensor:
    m = len(dims)
    perm = [p if p < i else p - 1 for p in range(m)]
    perm[i] = m - 1
    return cpermutation(dims, perm)


def cblock_from_end(dims: Sequence[int], i: int) -> ConcreteTensor:
    moved = list(dims[:i]) + list(dims[i + 1:]) + [dims[i]]
    m = len(dims)
    perm = [p if p < i else p + 1 for p in range(m)]
    perm[m - 1] = i
    return cpermutation(moved, perm)


def cblock_move(t: ConcreteTensor, i: int, j: int) -> ConcreteTensor:
    """``cblock_to_end(j) . t . cblock_from_end(i)``, applied as an axis move.

    Composing with a permutation tensor only reorders axes, so this equals the
    dense composite without building it.
    """
    m = len(t.lower)
    arr = np.moveaxis(t.entries, [i, m + j], [m - 1, t.entries.ndim - 1])
    lower = t.lower[:i] + t.lower[i + 1:] + (t.lower[i],)
    upper = t.upper[:j] + t.upper[j + 1:] + (t.upper[j],)
    return _wrap(lower, upper, arr)


def ctrace_contraction(t: ConcreteTensor, i: int, j: int) -> ConcreteTensor:
    """Trace input ``i`` with output ``j`` via block symmetries and a trace."""
    return ctrace(cblock_move(t, i, j), 1)


# -- evaluation --------------------------------------------------------------


def _factor_tensor(f, v: Valuation) -> ConcreteTensor:
    if isinstance(f, Delta):
        return cdelta(v.dim(f.lower.type))
    try:
        t = v.tensors[f.name]
    except KeyError:
        raise EvaluationError(f"symbol {f.name} is not assigned by the valuation") from None
    want = (tuple(v.dim(x) for x in f.in_types), tuple(v.dim(y) for y in f.out_types))
    if (t.lower, t.upper) != want:
        raise TypeMismatchError(f"tensor for {f.name} has dims {t.lower}/{t.upper}, expected {want}")
    return t


def _orders(e: EinsteinExpression, lower_order, upper_order):
    lower_order = sorted(e.free_lower) if lower_order is None else list(lower_order)
    upper_order = sorted(e.free_upper) if upper_order is None else list(upper_order)
    if set(lower_order) != e.free_lower or len(lower_order) != len(e.free_lower):
        raise EvaluationError("lower order must enumerate the free lower labels exactly")
    if set(upper_order) != e.free_upper or len(upper_order) != len(e.free_upper):
        raise EvaluationError("upper order must enumerate the free upper labels exactly")
    return lower_order, upper_order


_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _einsum(operands, out_labels):
    letters = {}
    for _, labels in operands:
        for l in labels:
            if l not in letters:
                if len(letters) == len(_LETTERS):
                    raise EvaluationError(f"more than {len(_LETTERS)} labels in one contraction step")
                letters[l] = _LETTERS[len(letters)]
    spec = ",".join("".join(letters[l] for l in labels) for _, labels in operands)
    spec += "->" + "".join(letters[l] for l in out_labels)
    return np.asarray(np.einsum(spec, *(a for a, _ in operands)), dtype=object)


def evaluate(
    e: EinsteinExpression,
    v: Valuation,
    lower_order: Sequence[Label] | None = None,
    upper_order: Sequence[Label] | None = None,
) -> ConcreteTensor:
    """Einstein summation over every repeated label of ``e``.

    Factors are contracted pairwise, each step summing the labels the pair
    shares, so no dense product of all factors is ever formed.
    """
    lower_order, upper_order = _orders(e, lower_order, upper_order)
    work = []
    for f in e.factors:
        t = _factor_tensor(f, v)
        labels = (f.lower, f.upper) if isinstance(f, Delta) else f.lower + f.upper
        work.append((t.entries, tuple(labels)))
    counts = {}
    for _, labels in work:
        for l in labels:
            counts[l] = counts.get(l, 0) + 1

    def reduce_self(arr, labels):
        keep = tuple(l for l in dict.fromkeys(labels) if labels.count(l) == 1)
        if len(keep) == len(labels):
            return arr, labels
        return _einsum([(arr, labels)], keep), keep

    work = [reduce_self(a, ls) for a, ls in work]
    while len(work) > 1:
        best = None
        for x, y in itertools.combinations(range(len(work)), 2):
            shared = set(work[x][1]) & set(work[y][1])
            if not shared:
                continue
            out = tuple(l for l in work[x][1] + work[y][1] if l not in shared)
            size = 1
            for l in out:
                size *= v.dim(l.type)
            if best is None or size < best[0]:
                best = (size, x, y, out)
        if best is None:
            break
        _, x, y, out = best
        merged = (_einsum([work[x], work[y]], out), out)
        work = [w for k, w in enumerate(work) if k not in (x, y)] + [merged]
    final = _einsum(work, tuple(lower_order) + tuple(upper_order)) if work else np.array(Fraction(1), dtype=object)
    return _wrap(
        [v.dim(l.type) for l in lower_order], [v.dim(l.type) for l in upper_order], final
    )


def evaluate_morphism(f: Morphism, v: Valuation) -> ConcreteTensor:
    return evaluate(f.expression(), v, inputs(f.dom), outputs(f.cod))


def evaluate_pinned(
    e: EinsteinExpression,
    v: Valuation,
    lower_order: Sequence[Label] | None = None,
    upper_order: Sequence[Label] | None = None,
) -> ConcreteTensor:
    """Evaluate through nested trace contractions of one big monoidal product.

    ``e`` is put in the pinned form ``delta_x^{x'} delta_{y'}^y E'`` where
    ``E'`` has no free labels, every repeated label is split into a fresh
    output label, and the resulting product of identities and factor images
    is contracted back with :func:`ctrace_contraction`, innermost pair first.
    Dense: only for small expressions.
    """
    lower_order, upper_order = _orders(e, lower_order, upper_order)
    s = LabelSupply().avoiding(e)
    xp, s = s.fresh_many(l.type for l in lower_order)
    yp, s = s.fresh_many(l.type for l in upper_order)
    inner = e.rename(dict(zip(lower_order, xp)), dict(zip(upper_order, yp)))
    pinned = (
        [Delta(a, b) for a, b in zip(lower_order, xp)]
        + [Delta(a, b) for a, b in zip(yp, upper_order)]
        + list(inner.factors)
    )
    pinned_e = EinsteinExpression(tuple(pinned))
    repeated = []
    for f in pinned:
        for l in (f.lower, f.upper) if isinstance(f, Delta) else f.lower + f.upper:
            if l in pinned_e.bound and l not in repeated:
                repeated.append(l)
    split = {}
    for l in repeated:
        split[l], s = s.fresh(l.type)
    factors = [f.rename({}, split) for f in pinned]

    t = cscalar(1)
    in_labels, out_labels = [], []
    for f in factors:
        t = cproduct(t, _factor_tensor(f, v))
        if isinstance(f, TensorSymbol):
            in_labels += f.lower
            out_labels += f.upper
        else:
            in_labels.append(f.lower)
            out_labels.append(f.upper)
    for l in reversed(repeated):
        i, j = in_labels.index(l), out_labels.index(split[l])
        t = ctrace_contraction(t, i, j)
        del in_labels[i]
        del out_labels[j]
    assert in_labels == list(lower_order) and out_labels == list(upper_order)
    return t
