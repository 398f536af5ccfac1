"""Seeded random alphabets, expressions, morphisms and valuations.

Used by the property tests and the acceptance suite.  Every function takes
a :class:`random.Random` so runs are reproducible.
"""
from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction
from typing import Sequence

from .category import Morphism, inputs, outputs
from .core import (
    Alphabet,
    Delta,
    EinsteinExpression,
    Label,
    LabelSupply,
    TensorSymbol,
    TypeName,
)
from .valuation import ConcreteTensor, Valuation

TYPE_NAMES = "ABCD"
SYMBOL_NAMES = ("psi", "phi", "xi", "chi", "eta", "rho")


def state_name(t: TypeName) -> str:
    return f"u{t}"


def effect_name(t: TypeName) -> str:
    return f"e{t}"


def random_alphabet(rng: random.Random, n_types: int = 3, n_symbols: int = 4, max_arity: int = 2) -> Alphabet:
    """Random symbols plus a state ``u<T> : -> T`` and an effect ``e<T> : T ->`` per type."""
    types = TYPE_NAMES[:n_types]
    decls = {}
    for name in SYMBOL_NAMES[:n_symbols]:
        ins = tuple(rng.choice(types) for _ in range(rng.randint(0, max_arity)))
        outs = tuple(rng.choice(types) for _ in range(rng.randint(0 if ins else 1, max_arity)))
        decls[name] = (ins, outs)
    for t in types:
        decls[state_name(t)] = ((), (t,))
        decls[effect_name(t)] = ((t,), ())
    return Alphabet(decls)


def _core_symbols(alphabet: Alphabet) -> list[str]:
    return [n for n in alphabet.declarations if n in SYMBOL_NAMES]


def random_wiring(
    rng: random.Random,
    alphabet: Alphabet,
    lower: Sequence[Label],
    upper: Sequence[Label],
    n_boxes: int,
    n_circles: int = 0,
    s: LabelSupply | None = None,
) -> EinsteinExpression:
    """A random reduced expression with exactly the given free labels.

    ``n_boxes`` symbols are drawn; states and effects are added to balance
    the number of wire ends of each type, then the ends are paired at random.
    """
    s = (s or LabelSupply()).avoiding(list(lower) + list(upper))
    names = _core_symbols(alphabet)
    boxes = [rng.choice(names) for _ in range(n_boxes)] if names else []
    sources, sinks = defaultdict(list), defaultdict(list)
    for a in lower:
        sources[a.type].append(("free", a))
    for b in upper:
        sinks[b.type].append(("free", b))

    def add_box(name):
        k = len(boxes_all)
        boxes_all.append(name)
        ins, outs = alphabet[name]
        for q, t in enumerate(ins):
            sinks[t].append(("box", k, q))
        for p, t in enumerate(outs):
            sources[t].append(("box", k, p))

    boxes_all: list[str] = []
    for name in boxes:
        add_box(name)
    for t in sorted(set(sources) | set(sinks)):
        while len(sources[t]) < len(sinks[t]):
            add_box(state_name(t))
        while len(sinks[t]) < len(sources[t]):
            add_box(effect_name(t))
    port_label: dict[tuple, Label] = {}
    deltas = []
    for t in sorted(sources):
        srcs, dsts = list(sources[t]), list(sinks[t])
        rng.shuffle(dsts)
        for src, dst in zip(srcs, dsts):
            if src[0] == "free" and dst[0] == "free":
                deltas.append(Delta(src[1], dst[1]))
            elif src[0] == "free":
                port_label[("in",) + dst[1:]] = src[1]
            elif dst[0] == "free":
                port_label[("out",) + src[1:]] = dst[1]
            else:
                l, s = s.fresh(t)
                port_label[("out",) + src[1:]] = l
                port_label[("in",) + dst[1:]] = l
    factors: list = []
    for k, name in enumerate(boxes_all):
        ins, outs = alphabet[name]
        factors.append(TensorSymbol(
            name,
            tuple(port_label[("in", k, q)] for q in range(len(ins))),
            tuple(port_label[("out", k, p)] for p in range(len(outs))),
        ))
    factors += deltas
    for _ in range(n_circles):
        l, s = s.fresh(rng.choice(alphabet.types))
        factors.append(Delta(l, l))
    rng.shuffle(factors)
    return EinsteinExpression(tuple(factors))


def random_free_labels(rng: random.Random, types: Sequence[TypeName], n_lower: int, n_upper: int):
    pool = [f"{c}{i}" for c in "abcdxyz" for i in range(1, 4)]
    names = rng.sample(pool, n_lower + n_upper)
    lower = [Label(n, rng.choice(types)) for n in names[:n_lower]]
    upper = [Label(n, rng.choice(types)) for n in names[n_lower:]]
    return lower, upper


def random_expression(
    rng: random.Random,
    alphabet: Alphabet,
    max_boxes: int = 4,
    max_free: int = 3,
    circles: bool = True,
) -> EinsteinExpression:
    types = alphabet.types
    lower, upper = random_free_labels(rng, types, rng.randint(0, max_free), rng.randint(0, max_free))
    return random_wiring(
        rng, alphabet, lower, upper, rng.randint(0, max_boxes),
        n_circles=rng.choice((0, 0, 0, 1)) if circles else 0,
    )


def random_object(rng: random.Random, types: Sequence[TypeName], max_len: int = 3) -> tuple[TypeName, ...]:
    return tuple(rng.choice(types) for _ in range(rng.randint(0, max_len)))


def random_morphism(
    rng: random.Random,
    alphabet: Alphabet,
    dom: Sequence[TypeName],
    cod: Sequence[TypeName],
    max_boxes: int = 2,
) -> Morphism:
    dom, cod = tuple(dom), tuple(cod)
    e = random_wiring(rng, alphabet, inputs(dom), outputs(cod), rng.randint(0, max_boxes),
                      n_circles=rng.choice((0, 0, 0, 1)))
    return Morphism.from_expression(e, inputs(dom), outputs(cod))


def random_fraction(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-3, 3), rng.randint(1, 3))


def random_tensor(rng: random.Random, lower: Sequence[int], upper: Sequence[int]) -> ConcreteTensor:
    size = 1
    for d in tuple(lower) + tuple(upper):
        size *= d
    return ConcreteTensor(tuple(lower), tuple(upper), [random_fraction(rng) for _ in range(size)])


def random_valuation(rng: random.Random, alphabet: Alphabet, max_dim: int = 3) -> Valuation:
    dims = {t: rng.randint(1, max_dim) for t in alphabet.types}
    tensors = {
        name: random_tensor(rng, [dims[t] for t in ins], [dims[t] for t in outs])
        for name, (ins, outs) in alphabet.declarations.items()
    }
    return Valuation(dims, tensors)


# -- equivalence moves and perturbations --------------------------------------


def shuffle_factors(rng: random.Random, e: EinsteinExpression) -> EinsteinExpression:
    factors = list(e.factors)
    rng.shuffle(factors)
    return EinsteinExpression(tuple(factors))


def rename_bound(rng: random.Random, e: EinsteinExpression, s: LabelSupply | None = None) -> EinsteinExpression:
    """Rename every bound label to a fresh one, in random order."""
    s = (s or LabelSupply()).avoiding(e)
    bound = sorted(e.bound)
    rng.shuffle(bound)
    ren = {}
    for l in bound:
        ren[l], s = s.fresh(l.type)
    return e.rename(ren, ren)


def insert_delta(rng: random.Random, e: EinsteinExpression, s: LabelSupply | None = None) -> EinsteinExpression:
    """Split one label occurrence with an eliminable delta."""
    labels = sorted(e.labels)
    if not labels:
        return e
    s = (s or LabelSupply()).avoiding(e)
    l = rng.choice(labels)
    new, s = s.fresh(l.type)
    if l in e.free_lower or (l in e.bound and rng.random() < 0.5):
        # lower occurrence of l now reads `new`; delta_l^new feeds it
        factors = [f.rename({l: new}, {}) for f in e.factors] + [Delta(l, new)]
    else:
        factors = [f.rename({}, {l: new}) for f in e.factors] + [Delta(new, l)]
    return EinsteinExpression(tuple(factors))


def random_equivalent(rng: random.Random, e: EinsteinExpression, moves: int = 3) -> EinsteinExpression:
    for _ in range(moves):
        move = rng.choice((shuffle_factors, rename_bound, insert_delta))
        e = move(rng, e)
    return shuffle_factors(rng, e)


def swap_uppers(rng: random.Random, e: EinsteinExpression) -> EinsteinExpression:
    """Exchange the upper occurrences of two labels of the same type, if any."""
    uppers = sorted(e.free_upper | e.bound)
    by_type = defaultdict(list)
    for l in uppers:
        by_type[l.type].append(l)
    choices = [ls for ls in by_type.values() if len(ls) > 1]
    if not choices:
        return e
    x, y = rng.sample(rng.choice(choices), 2)
    return e.rename({}, {x: y, y: x})
