"""Delta elimination, canonical representatives and the equivalence test.

Two expressions are equivalent when one is obtained from the other by
permuting factors, inserting or removing eliminable deltas, and renaming
bound labels.  Free labels are never renamed.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Callable

from .canon import PINNED, WIRED, PortGraph, canonical_order
from .core import (
    RESERVED,
    Delta,
    EinsteinExpression,
    Label,
    TensorSymbol,
    TypeName,
)

ORACLE_MAX_FACTORS = 6
ORACLE_MAX_BOUND = 8


class OracleBoundExceeded(Exception):
    """The brute-force oracle refuses inputs beyond its size bound."""


def bound_label(n: int, t: TypeName) -> Label:
    """The ``n``-th canonical bound label of a representative."""
    return Label(f"{RESERVED}#{n}", t)


def delta_reduce(e: EinsteinExpression) -> EinsteinExpression:
    """Eliminate every delta one of whose labels is repeated elsewhere.

    What remains among the deltas are bare wires (both labels free) and
    circles ``delta_a^a``.
    """
    factors = list(e.factors)
    changed = True
    while changed:
        changed = False
        for i, f in enumerate(factors):
            if not isinstance(f, Delta) or f.is_circle:
                continue
            a, b = f.lower, f.upper
            rest = factors[:i] + factors[i + 1:]
            if any(a in _uppers(g) for g in rest):
                factors = [g.rename({}, {a: b}) for g in rest]
            elif any(b in _lowers(g) for g in rest):
                factors = [g.rename({b: a}, {}) for g in rest]
            else:
                continue
            changed = True
            break
    return EinsteinExpression(tuple(factors))


def _lowers(f):
    return f.lower if isinstance(f, TensorSymbol) else (f.lower,)


def _uppers(f):
    return f.upper if isinstance(f, TensorSymbol) else (f.upper,)


def is_reduced(e: EinsteinExpression) -> bool:
    return len(delta_reduce(e).factors) == len(e.factors)


@dataclass(frozen=True)
class FreeTensor:
    """Canonical representative of an equivalence class of expressions.

    Equal classes give field-for-field equal representatives.
    """

    symbols: tuple[TensorSymbol, ...]
    wires: tuple[Delta, ...]
    circles: tuple[tuple[TypeName, int], ...]
    free_lower: frozenset
    free_upper: frozenset

    def expression(self) -> EinsteinExpression:
        used = {l for s in self.symbols for l in s.lower if l.name and l.name.startswith(f"{RESERVED}#")}
        factors: list = list(self.symbols) + list(self.wires)
        n = len(used)
        for t, count in self.circles:
            for _ in range(count):
                n += 1
                c = bound_label(n, t)
                factors.append(Delta(c, c))
        return EinsteinExpression(tuple(factors))

    @property
    def circle_counts(self) -> Counter:
        return Counter(dict(self.circles))


def port_graph(symbols, free_key: Callable[[Label], tuple]) -> PortGraph:
    lower_at, upper_at = {}, {}
    for k, s in enumerate(symbols):
        for q, l in enumerate(s.lower):
            lower_at[l] = (k, q)
        for p, l in enumerate(s.upper):
            upper_at[l] = (k, p)
    keys, ins, outs = [], [], []
    for s in symbols:
        keys.append((s.name, s.in_types, s.out_types))
        ins.append([
            (WIRED, *upper_at[l]) if l in upper_at else (PINNED, free_key(l)) for l in s.lower
        ])
        outs.append([
            (WIRED, *lower_at[l]) if l in lower_at else (PINNED, free_key(l)) for l in s.upper
        ])
    return PortGraph(keys, ins, outs)


def _split(e: EinsteinExpression):
    symbols = [f for f in e.factors if isinstance(f, TensorSymbol)]
    wires = [f for f in e.factors if isinstance(f, Delta) and not f.is_circle]
    circles = Counter(f.lower.type for f in e.factors if isinstance(f, Delta) and f.is_circle)
    return symbols, wires, circles


def canonical(e: EinsteinExpression) -> FreeTensor:
    """Canonical representative of the class of ``e``."""
    reduced = delta_reduce(e)
    symbols, wires, circles = _split(reduced)
    _, order = canonical_order(port_graph(symbols, Label.sort_key))
    rename: dict[Label, Label] = {}
    out = []
    for k in order:
        s = symbols[k]
        for l in s.lower + s.upper:
            if l in reduced.bound and l not in rename:
                rename[l] = bound_label(len(rename) + 1, l.type)
        out.append(s.rename(rename, rename))
    return FreeTensor(
        symbols=tuple(out),
        wires=tuple(sorted(wires, key=lambda d: (d.lower.sort_key(), d.upper.sort_key()))),
        circles=tuple(sorted(circles.items())),
        free_lower=reduced.free_lower,
        free_upper=reduced.free_upper,
    )


def equivalent(e1: EinsteinExpression, e2: EinsteinExpression) -> bool:
    if e1.free_lower != e2.free_lower or e1.free_upper != e2.free_upper:
        return False
    return canonical(e1) == canonical(e2)


def _free_type(l: Label) -> tuple:
    return ("free", l.type)


def equivalent_up_to_relabelling(e1: EinsteinExpression, e2: EinsteinExpression) -> bool:
    """Equivalence after some type-preserving renaming of the free labels.

    Not the equivalence of the free tensor system, where free labels are
    part of a tensor's identity; see :func:`equivalent`.
    """
    def invariant(e):
        reduced = delta_reduce(e)
        symbols, wires, circles = _split(reduced)
        encoding, _ = canonical_order(port_graph(symbols, _free_type))
        return encoding, sorted(d.lower.type for d in wires), sorted(circles.items())

    return invariant(e1) == invariant(e2)


def oracle_equivalent(
    e1: EinsteinExpression,
    e2: EinsteinExpression,
    max_factors: int = ORACLE_MAX_FACTORS,
    max_bound: int = ORACLE_MAX_BOUND,
) -> bool:
    """Decide equivalence by exhaustive search over factor permutations.

    Inputs are delta-reduced first.  For each permutation of the second
    expression's tensor symbols, the only candidate bijection of bound labels
    is the one read off position by position, so the search is exhaustive.
    """
    r1, r2 = delta_reduce(e1), delta_reduce(e2)
    for r in (r1, r2):
        if len(r.factors) > max_factors or len(r.bound) > max_bound:
            raise OracleBoundExceeded(
                f"{len(r.factors)} factors / {len(r.bound)} bound labels exceeds "
                f"the oracle bound of {max_factors} / {max_bound}"
            )
    if r1.free_lower != r2.free_lower or r1.free_upper != r2.free_upper:
        return False
    s1, w1, c1 = _split(r1)
    s2, w2, c2 = _split(r2)
    if c1 != c2 or set(w1) != set(w2) or len(s1) != len(s2):
        return False
    for perm in itertools.permutations(range(len(s2))):
        forward: dict[Label, Label] = {}
        backward: dict[Label, Label] = {}
        ok = True
        for i, j in enumerate(perm):
            a, b = s1[i], s2[j]
            if a.name != b.name or len(a.lower) != len(b.lower) or len(a.upper) != len(b.upper):
                ok = False
                break
            for x, y in zip(a.lower + a.upper, b.lower + b.upper):
                if x.type != y.type:
                    ok = False
                elif (x in r1.bound) != (y in r2.bound):
                    ok = False
                elif x not in r1.bound:
                    ok = x == y
                else:
                    ok = forward.setdefault(x, y) == y and backward.setdefault(y, x) == x
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return True
    return False
