"""Law checkers shared by the unit tests and the acceptance suite.

Each checker draws what it needs from ``rng`` and returns the names of the
laws that failed (an empty list means every law held).
"""
from __future__ import annotations

import itertools
import random
from collections import defaultdict
from fractions import Fraction

from abstensor.category import (
    LabelledMorphism,
    cnf,
    compose,
    identity,
    mtensor,
    symmetry,
    trace,
    trace_contraction,
)
from abstensor.core import (
    EMPTY,
    Delta,
    EinsteinExpression,
    Label,
    TensorSymbol,
    contract,
    delta,
    product,
    relabel,
    validate,
)
from abstensor.generators import (
    random_alphabet,
    random_equivalent,
    random_morphism,
    random_object,
    random_wiring,
    rename_bound,
    swap_uppers,
)
from abstensor.normal_form import equivalent
from abstensor.valuation import (
    ConcreteTensor,
    Valuation,
    ccompose,
    cidentity,
    cproduct,
    csymmetry,
    ctrace,
    evaluate_morphism,
)


def bounded_expression(rng, alphabet, names=("a", "b"), max_symbols=6, max_free=3, circles=True):
    """A random reduced expression with at most ``max_symbols`` tensor symbols.

    Free lower labels are named ``<names[0]><k>``, free upper ``<names[1]><k>``.
    """
    types = alphabet.types
    while True:
        n_lo, n_up = rng.randint(0, max_free), rng.randint(0, max_free)
        lower = [Label(f"{names[0]}{k + 1}", rng.choice(types)) for k in range(n_lo)]
        upper = [Label(f"{names[1]}{k + 1}", rng.choice(types)) for k in range(n_up)]
        e = random_wiring(rng, alphabet, lower, upper, rng.randint(0, max_symbols),
                          n_circles=rng.choice((0, 0, 0, 1)) if circles else 0)
        if len(e.symbols) <= max_symbols:
            return e


def admissible_pairs(e: EinsteinExpression):
    """Every (free lower, free upper) pair of equal type."""
    return [(a, b) for a in sorted(e.free_lower) for b in sorted(e.free_upper) if a.type == b.type]


def random_relabelling(rng, labels, avoid, prefix="r"):
    """An injective, type-preserving map defined on all of ``labels``.

    Targets are drawn from the labels themselves and from new names, so the
    map can permute labels as well as rename them.
    """
    taken = {l.name for l in avoid} | {l.name for l in labels}
    by_type = defaultdict(list)
    for l in sorted(labels):
        by_type[l.type].append(l)
    f = {}
    counter = itertools.count(1)
    for t, group in by_type.items():
        fresh_names = []
        while len(fresh_names) < len(group):
            n = f"{prefix}{next(counter)}"
            if n not in taken:
                fresh_names.append(Label(n, t))
        targets = rng.sample(group + fresh_names, len(group))
        f.update(zip(group, targets))
    return f


def _eq(e1, e2) -> bool:
    validate(e1)
    validate(e2)
    return equivalent(e1, e2)


def ats_laws(rng: random.Random, alphabet, e: EinsteinExpression) -> list[str]:
    """Tensor-system and relabelling laws, plus bound-label invariance, on ``e`` and fresh partners."""
    failed = []
    pairs = admissible_pairs(e)
    e2 = bounded_expression(rng, alphabet, names=("c", "d"), max_symbols=2)
    e3 = bounded_expression(rng, alphabet, names=("g", "h"), max_symbols=2)

    # disjoint contractions commute
    disjoint = [(p, q) for p, q in itertools.combinations(pairs, 2) if p[0] != q[0] and p[1] != q[1]]
    if disjoint:
        (a, b), (a2, b2) = rng.choice(disjoint)
        if not _eq(contract(contract(e, a, b), a2, b2), contract(contract(e, a2, b2), a, b)):
            failed.append("contraction commutes")

    # product is a commutative monoid
    if not _eq(product(product(e, e2), e3), product(e, product(e2, e3))):
        failed.append("product associativity")
    if not _eq(product(e, e2), product(e2, e)):
        failed.append("product commutativity")
    if not (_eq(product(e, EMPTY), e) and _eq(product(EMPTY, e), e)):
        failed.append("product unit")

    # contraction distributes over product
    if pairs:
        a, b = rng.choice(pairs)
        if not _eq(contract(product(e, e2), a, b), product(contract(e, a, b), e2)):
            failed.append("contraction through product")

    # delta absorption, both sides: K_a^b(delta_a^c psi) = psi[b->c], K_b^c(delta_a^c psi) = psi[b->a]
    if e.free_upper:
        b = rng.choice(sorted(e.free_upper))
        a, c = Label("dx", b.type), Label("dy", b.type)
        if not _eq(contract(product(delta(a, c), e), a, b), relabel(e, {b: c})):
            failed.append("delta absorption upper")
    if e.free_lower:
        b = rng.choice(sorted(e.free_lower))
        a, c = Label("dx", b.type), Label("dy", b.type)
        if not _eq(contract(product(delta(a, c), e), b, c), relabel(e, {b: a})):
            failed.append("delta absorption lower")

    # relabelling is functorial
    f = random_relabelling(rng, e.free, e.labels, prefix="r")
    ef = relabel(e, f)
    g = random_relabelling(rng, ef.free, ef.labels, prefix="s")
    gf = {x: g[y] for x, y in f.items()}
    if not _eq(relabel(ef, g), relabel(e, gf)):
        failed.append("relabel composition")
    if not _eq(relabel(e, {l: l for l in e.free}), e):
        failed.append("relabel identity")

    # relabelling commutes with product: the image of f avoids the labels of e2 (prefix "r" never occurs there)
    if not _eq(product(relabel(e, f), e2), relabel(product(e, e2), f)):
        failed.append("relabel through product")

    # relabelling commutes with contraction
    if pairs:
        a, b = rng.choice(pairs)
        restricted = {x: y for x, y in f.items() if x not in (a, b)}
        if not _eq(relabel(contract(e, a, b), restricted), contract(relabel(e, f), f[a], f[b])):
            failed.append("relabel through contraction")

    # relabelling a delta
    t = rng.choice(alphabet.types)
    x, y, x2, y2 = (Label(n, t) for n in ("x", "y", "x2", "y2"))
    if relabel(delta(x, y), {x: x2, y: y2}) != delta(x2, y2):
        failed.append("relabel delta")

    # bound labels are irrelevant
    if not _eq(rename_bound(rng, e), e):
        failed.append("bound-label invariance")
    return failed


# -- traced symmetric monoidal category --------------------------------------


def smc_laws(rng: random.Random, alphabet, max_len: int = 3) -> list[str]:
    """Category, strict monoidal, symmetry and the five trace axioms."""
    types = alphabet.types
    obj = lambda: random_object(rng, types, max_len)  # noqa: E731
    mor = lambda d, c: random_morphism(rng, alphabet, d, c)  # noqa: E731
    failed = []
    U, V, W, Z = obj(), obj(), obj(), obj()
    f, g, h = mor(U, V), mor(V, W), mor(W, Z)

    if compose(h, compose(g, f)) != compose(compose(h, g), f):
        failed.append("associativity")
    if compose(identity(V), f) != f or compose(f, identity(U)) != f:
        failed.append("unit")

    f2 = mor(W, Z)
    if mtensor(mtensor(f, g), h) != mtensor(f, mtensor(g, h)):
        failed.append("tensor associativity")
    if mtensor(f, identity(())) != f or mtensor(identity(()), f) != f:
        failed.append("tensor unit")
    if mtensor(identity(U), identity(V)) != identity(U + V):
        failed.append("tensor of identities")
    g2 = mor(Z, U)
    if compose(mtensor(g, g2), mtensor(f, f2)) != mtensor(compose(g, f), compose(g2, f2)):
        failed.append("interchange")

    if compose(symmetry(V, U), symmetry(U, V)) != identity(U + V):
        failed.append("symmetry involution")
    if symmetry((), U) != identity(U):
        failed.append("empty symmetry")
    if compose(symmetry(V, Z), mtensor(f, f2)) != compose(mtensor(f2, f), symmetry(U, W)):
        failed.append("symmetry naturality")
    if symmetry(U, V + W) != compose(mtensor(identity(V), symmetry(U, W)), mtensor(symmetry(U, V), identity(W))):
        failed.append("hexagon")

    # trace axioms; f_x : U X -> V X
    X, Y = obj(), obj()
    fx = mor(U + X, V + X)
    hh, gg = mor(W, U), mor(V, Z)
    lhs = trace(compose(mtensor(gg, identity(X)), compose(fx, mtensor(hh, identity(X)))), X)
    if lhs != compose(gg, compose(trace(fx, X), hh)):
        failed.append("tightening")

    fs, gs = mor(U + X, V + Y), mor(Y, X)
    if trace(compose(fs, mtensor(identity(U), gs)), Y) != trace(compose(mtensor(identity(V), gs), fs), X):
        failed.append("sliding")

    if trace(f, ()) != f:
        failed.append("vanishing unit")
    fxy = mor(U + X + Y, V + X + Y)
    if trace(fxy, X + Y) != trace(trace(fxy, Y), X):
        failed.append("vanishing product")

    if trace(mtensor(g, fx), X) != mtensor(g, trace(fx, X)):
        failed.append("strength")

    if trace(symmetry(X, X), X) != identity(X):
        failed.append("yanking")
    return failed


# -- trace contraction and contraction normal form ----------------------------


def random_labelled(rng, alphabet, prefix: str, max_free: int = 3, min_pairs: int = 0) -> LabelledMorphism:
    """A labelled morphism whose labels are ``<prefix>i<k>`` / ``<prefix>o<k>``."""
    types = alphabet.types
    while True:
        n_in, n_out = rng.randint(0, max_free), rng.randint(0, max_free)
        ins = [Label(f"{prefix}i{k}", rng.choice(types)) for k in range(n_in)]
        outs = [Label(f"{prefix}o{k}", rng.choice(types)) for k in range(n_out)]
        common = {l.type for l in ins} & {l.type for l in outs}
        if len(common) >= min_pairs:
            break
    e = random_wiring(rng, alphabet, ins, outs, rng.randint(0, 2), n_circles=rng.choice((0, 0, 1)))
    return LabelledMorphism.from_expression(e, ins, outs)


def c_equals_k(rng, alphabet) -> bool:
    """C_i^j on a labelled morphism agrees with the free contraction K_i^j."""
    f = random_labelled(rng, alphabet, "p", min_pairs=1)
    pairs = [(i, j) for i in f.in_labels for j in f.out_labels if i.type == j.type]
    i, j = rng.choice(pairs)
    via_c = trace_contraction(f, i, j)
    via_k = contract(f.tensor(), i, j)
    return equivalent(via_c.tensor(), via_k) and via_c == LabelledMorphism.from_expression(
        via_k, via_c.in_labels, via_c.out_labels
    )


def contraction_commutes(rng, alphabet) -> bool:
    while True:
        f = random_labelled(rng, alphabet, "p", max_free=3, min_pairs=1)
        pairs = [(i, j) for i in f.in_labels for j in f.out_labels if i.type == j.type]
        disjoint = [(p, q) for p, q in itertools.combinations(pairs, 2) if p[0] != q[0] and p[1] != q[1]]
        if disjoint:
            break
    (i, j), (i2, j2) = rng.choice(disjoint)
    one = trace_contraction(trace_contraction(f, i2, j2), i, j)
    two = trace_contraction(trace_contraction(f, i, j), i2, j2)
    return one == two


def _contracting_pairs(rng, parts, exclude=()):
    """Randomly match in/out labels of equal type across ``parts``."""
    ins = [l for p in parts for l in p.in_labels if l not in exclude]
    outs = [l for p in parts for l in p.out_labels if l not in exclude]
    rng.shuffle(ins)
    pairs, used = [], set()
    for i in ins:
        options = [j for j in outs if j.type == i.type and j not in used]
        if options and rng.random() < 0.7:
            j = rng.choice(options)
            used.add(j)
            pairs.append((i, j))
    return pairs


def _closed_part(rng, alphabet, prefix):
    """A labelled morphism with at least one label."""
    while True:
        p = random_labelled(rng, alphabet, prefix, max_free=2)
        if p.in_labels or p.out_labels:
            return p


def reorder_totally_contracted(rng, alphabet) -> bool:
    """Two totally contracted parts can be swapped without changing the CNF."""
    # Two parts whose labels pair up completely with each other.
    types = alphabet.types
    left_in = [Label(f"xi{k}", rng.choice(types)) for k in range(rng.randint(0, 2))]
    left_out = [Label(f"xo{k}", rng.choice(types)) for k in range(rng.randint(0, 2))]
    right_in = [Label(f"yi{k}", l.type) for k, l in enumerate(left_out)]
    right_out = [Label(f"yo{k}", l.type) for k, l in enumerate(left_in)]
    if not left_in and not left_out:
        left_in, right_out = [Label("xi0", types[0])], [Label("yo0", types[0])]
    a = LabelledMorphism.from_expression(random_wiring(rng, alphabet, left_in, left_out, rng.randint(0, 2)), left_in, left_out)
    b = LabelledMorphism.from_expression(random_wiring(rng, alphabet, right_in, right_out, rng.randint(0, 2)), right_in, right_out)
    tc_pairs = list(zip(left_in, right_out)) + list(zip(right_in, left_out))
    others = [_closed_part(rng, alphabet, f"z{k}") for k in range(rng.randint(0, 2))]
    other_pairs = _contracting_pairs(rng, others)
    pairs = tc_pairs + other_pairs
    rng.shuffle(pairs)
    slots = list(range(len(others) + 2))
    ia, ib = sorted(rng.sample(slots, 2))
    before, after = list(others), list(others)
    before.insert(ia, a)
    before.insert(ib, b)
    after.insert(ia, b)
    after.insert(ib, a)
    return cnf(before, pairs) == cnf(after, pairs)


def remove_identity_part(rng, alphabet) -> bool:
    """A totally contracted identity part, not contracted with itself, can be dropped."""
    while True:
        others = [_closed_part(rng, alphabet, f"z{k}") for k in range(rng.randint(1, 3))]
        ins = [l for p in others for l in p.in_labels]
        outs = [l for p in others for l in p.out_labels]
        matches = [(i, j) for i in ins for j in outs if i.type == j.type]
        if matches:
            break
    i, j = rng.choice(matches)
    t = i.type
    x, y = Label("wx", t), Label("wy", t)
    ident = LabelledMorphism(identity((t,)), (x,), (y,))
    rest = _contracting_pairs(rng, others, exclude=(i, j))
    with_id = list(others)
    with_id.insert(rng.randint(0, len(others)), ident)
    pairs_with = rest + [(x, j), (i, y)]
    rng.shuffle(pairs_with)
    pairs_without = rest + [(i, j)]
    rng.shuffle(pairs_without)
    return cnf(with_id, pairs_with) == cnf(others, pairs_without)


def new_alphabet(rng, n_types=None):
    return random_alphabet(rng, n_types=n_types or rng.randint(1, 4), n_symbols=rng.randint(1, 4))


# -- pairs for the equivalence decision -----------------------------------------


def ring_expression(cycles, t="A"):
    """Directed cycles of unary symbols ``name : t -> t``, one list of names per cycle."""
    factors, k = [], 0
    for names in cycles:
        n = len(names)
        for pos, name in enumerate(names):
            lo = Label(f"k{k + pos}", t)
            up = Label(f"k{k + (pos + 1) % n}", t)
            factors.append(TensorSymbol(name, (lo,), (up,)))
        k += n
    return EinsteinExpression(tuple(factors))


def ring_pair(rng, names=("psi", "phi"), t="A"):
    """Two arrangements of the same unary symbols into cycles.

    Colour refinement alone cannot tell these apart: every box sees the same
    neighbourhood at every depth unless the arrangement breaks symmetry.
    """
    n = rng.randint(2, 6)
    seq = [rng.choice(names) for _ in range(n)]
    left = [seq]
    kind = rng.randrange(4)
    if kind == 0:
        r = rng.randrange(n)
        right = [seq[r:] + seq[:r]]
    elif kind == 1:
        right = [seq[::-1]]
    elif kind == 2:
        cut = rng.randint(1, n - 1)
        right = [seq[:cut], seq[cut:]]
    else:
        other = list(seq)
        rng.shuffle(other)
        right = [other]
    order = list(ring_expression(right, t).factors)
    rng.shuffle(order)
    return ring_expression(left, t), EinsteinExpression(tuple(order))


def permute_bound_uppers(rng, e):
    """Apply a random type-preserving permutation of bound labels to upper occurrences only."""
    by_type = defaultdict(list)
    for l in sorted(e.bound):
        by_type[l.type].append(l)
    perm = {}
    for group in by_type.values():
        shuffled = rng.sample(group, len(group))
        perm.update(zip(group, shuffled))
    return e.rename({}, perm)


def random_pair(rng, alphabet, max_symbols=4):
    """A pair of expressions over the same free labels, equivalent or not."""
    unary = defaultdict(list)
    for name, (ins, outs) in alphabet.declarations.items():
        if len(ins) == 1 and ins == outs:
            unary[ins[0]].append(name)
    if unary and rng.randrange(5) == 0:
        t = rng.choice(sorted(unary))
        return ring_pair(rng, unary[t], t)
    e = bounded_expression(rng, alphabet, max_symbols=max_symbols)
    kind = rng.randrange(4)
    if kind == 0:
        other = random_equivalent(rng, e)
    elif kind == 1:
        other = swap_uppers(rng, random_equivalent(rng, e, moves=1))
    elif kind == 2:
        other = permute_bound_uppers(rng, e)
    elif kind == 3:
        lower, upper = sorted(e.free_lower), sorted(e.free_upper)
        other = random_wiring(rng, alphabet, lower, upper, len(e.symbols) // 2)
    return e, other


# -- concrete oracles -------------------------------------------------------------


def tensor(lower, upper, entries):
    return ConcreteTensor(tuple(lower), tuple(upper), [Fraction(x) for x in entries])


def brute_evaluate(e: EinsteinExpression, v: Valuation, lower, upper) -> ConcreteTensor:
    """Sum over every assignment of every label; no numpy contraction involved."""
    labels = sorted(e.labels)
    free = list(lower) + list(upper)
    out_dims = [v.dim(l.type) for l in free]
    result = {}
    for idx in itertools.product(*(range(v.dim(l.type)) for l in labels)):
        at = dict(zip(labels, idx))
        term = Fraction(1)
        for f in e.factors:
            if isinstance(f, Delta):
                term *= int(at[f.lower] == at[f.upper])
            else:
                term *= v.tensors[f.name].entries[tuple(at[l] for l in f.lower + f.upper)]
        key = tuple(at[l] for l in free)
        result[key] = result.get(key, Fraction(0)) + term
    entries = [result[k] for k in itertools.product(*(range(d) for d in out_dims))]
    return tensor(out_dims[:len(lower)], out_dims[len(lower):], entries)


def brute_partial_trace(t: ConcreteTensor, k: int) -> ConcreteTensor:
    m, n = len(t.lower) - k, len(t.upper) - k
    lo, up = t.lower[:m], t.upper[:n]
    entries = []
    for i in itertools.product(*(range(d) for d in lo + up)):
        total = Fraction(0)
        for j in itertools.product(*(range(d) for d in t.lower[m:])):
            total += t.entries[i[:m] + j + i[m:] + j]
        entries.append(total)
    return tensor(lo, up, entries)


def functor_laws(rng, alphabet, v) -> list[str]:
    types = alphabet.types
    dims = lambda xs: [v.dim(t) for t in xs]  # noqa: E731
    ev = lambda f: evaluate_morphism(f, v)  # noqa: E731
    U, V, W, X = (random_object(rng, types, 2) for _ in range(4))
    f, g = random_morphism(rng, alphabet, U, V), random_morphism(rng, alphabet, V, W)
    h = random_morphism(rng, alphabet, W, X)
    failed = []
    if ev(identity(U)) != cidentity(dims(U)):
        failed.append("identity")
    if ev(compose(g, f)) != ccompose(ev(g), ev(f)):
        failed.append("composition")
    if ev(mtensor(f, h)) != cproduct(ev(f), ev(h)):
        failed.append("tensor")
    if ev(symmetry(U, V)) != csymmetry(dims(U), dims(V)):
        failed.append("symmetry")
    fx = random_morphism(rng, alphabet, U + X, V + X)
    traced = ev(trace(fx, X))
    if traced != ctrace(ev(fx), len(X)) or traced != brute_partial_trace(ev(fx), len(X)):
        failed.append("trace")
    return failed
