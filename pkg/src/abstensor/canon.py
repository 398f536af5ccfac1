"""Canonical forms of port graphs.

A port graph is a set of boxes, each with an ordered list of input ports and
output ports.  Every port is either wired to a port of the opposite side of
some box, or pinned to a fixed external marker (a free label, a boundary
position).  Two port graphs are isomorphic when a box bijection preserves
box keys, port order, wiring and markers.

The canonical form is computed by colour refinement, then by individualising
one box per connected component: because ports are ordered, fixing a single
box of a component fixes the whole component through a breadth-first walk, so
the minimum over the walks started in the smallest colour cell is canonical.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable, Sequence

#: Port entries.  ``(WIRED, box, port)`` points at the partner port on the
#: opposite side; ``(PINNED, marker)`` holds a fixed external marker.
PINNED = 0
WIRED = 1


@dataclass
class PortGraph:
    keys: list[Hashable]
    ins: list[list[tuple]]
    outs: list[list[tuple]]

    def __len__(self) -> int:
        return len(self.keys)

    def check(self) -> None:
        for b, ports in enumerate(self.ins):
            for q, entry in enumerate(ports):
                if entry[0] == WIRED:
                    _, c, p = entry
                    assert self.outs[c][p] == (WIRED, b, q), (b, q, entry)
        for b, ports in enumerate(self.outs):
            for p, entry in enumerate(ports):
                if entry[0] == WIRED:
                    _, c, q = entry
                    assert self.ins[c][q] == (WIRED, b, p), (b, p, entry)


def _ranks(signatures: Sequence[Any]) -> list[int]:
    table = {sig: i for i, sig in enumerate(sorted(set(signatures)))}
    return [table[sig] for sig in signatures]


def refine(g: PortGraph) -> list[int]:
    """Stable colouring of the boxes of ``g``.

    Colours are ranks of signatures sorted within ``g``, so isomorphic graphs
    receive the same colours on corresponding boxes.
    """
    def pinned(entry):
        return entry if entry[0] == PINNED else (WIRED,)

    colors = _ranks([
        (g.keys[b], tuple(map(pinned, g.ins[b])), tuple(map(pinned, g.outs[b])))
        for b in range(len(g))
    ])
    while True:
        def look(entry):
            if entry[0] == PINNED:
                return entry
            return (WIRED, colors[entry[1]], entry[2])

        new = _ranks([
            (colors[b], tuple(map(look, g.ins[b])), tuple(map(look, g.outs[b])))
            for b in range(len(g))
        ])
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


def components(g: PortGraph) -> list[list[int]]:
    seen = [False] * len(g)
    out = []
    for start in range(len(g)):
        if seen[start]:
            continue
        comp, stack = [], [start]
        seen[start] = True
        while stack:
            b = stack.pop()
            comp.append(b)
            for entry in g.ins[b] + g.outs[b]:
                if entry[0] == WIRED and not seen[entry[1]]:
                    seen[entry[1]] = True
                    stack.append(entry[1])
        out.append(sorted(comp))
    return out


def _walk(g: PortGraph, start: int) -> list[int]:
    order, index = [start], {start: 0}
    i = 0
    while i < len(order):
        b = order[i]
        for entry in g.ins[b] + g.outs[b]:
            if entry[0] == WIRED and entry[1] not in index:
                index[entry[1]] = len(order)
                order.append(entry[1])
        i += 1
    return order


def _encode(g: PortGraph, order: list[int]) -> tuple:
    index = {b: i for i, b in enumerate(order)}

    def enc(entry):
        if entry[0] == PINNED:
            return entry
        return (WIRED, index[entry[1]], entry[2])

    return tuple(
        (g.keys[b], tuple(map(enc, g.ins[b])), tuple(map(enc, g.outs[b]))) for b in order
    )


def canonical_order(g: PortGraph) -> tuple[tuple, list[int]]:
    """Return ``(encoding, order)``.

    ``encoding`` is a complete isomorphism invariant of ``g``; ``order`` lists
    the boxes of ``g`` in canonical order (ties only between automorphic
    boxes, which yield identical encodings).
    """
    colors = refine(g)
    found = []
    for comp in components(g):
        best = min(colors[b] for b in comp)
        candidates = [b for b in comp if colors[b] == best]
        found.append(min((_encode(g, o), o) for o in (_walk(g, b) for b in candidates)))
    found.sort(key=lambda pair: pair[0])
    encoding = tuple(enc for enc, _ in found)
    order = [b for _, o in found for b in o]
    return encoding, order


def isomorphic(g1: PortGraph, g2: PortGraph) -> bool:
    if len(g1) != len(g2):
        return False
    return canonical_order(g1)[0] == canonical_order(g2)[0]
