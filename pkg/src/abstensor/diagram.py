"""Combinatorial string diagrams.

A diagram is boxes with ordered typed ports, wires between port endpoints,
ordered input and output boundaries, and a multiset of typed circles.  Only
connectivity is stored, so layout and enumeration order carry no meaning.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import jsonschema

from .canon import PINNED, WIRED, PortGraph, canonical_order
from .core import (
    Delta,
    EinsteinExpression,
    Label,
    LabelSupply,
    TensorError,
    TensorSymbol,
    TypeMismatchError,
    TypeName,
)
from .normal_form import delta_reduce


class DiagramError(TensorError):
    pass


@dataclass(frozen=True)
class Box:
    id: int
    name: str
    ins: tuple[TypeName, ...]
    outs: tuple[TypeName, ...]

    def __post_init__(self):
        object.__setattr__(self, "ins", tuple(self.ins))
        object.__setattr__(self, "outs", tuple(self.outs))


@dataclass(frozen=True)
class Endpoint:
    """A box port (``box`` set) or a boundary position (``box is None``).

    ``side`` is ``"in"`` or ``"out"``: which list of the box, or which
    boundary, the position ``port`` indexes.
    """

    side: str
    port: int
    box: int | None = None

    @classmethod
    def boundary(cls, side: str, pos: int) -> "Endpoint":
        return cls(side, pos)

    @property
    def on_boundary(self) -> bool:
        return self.box is None

    def sort_key(self) -> tuple:
        if self.box is None:
            return (0, self.side, self.port)
        return (1, self.box, self.side, self.port)


Wire = tuple[Endpoint, Endpoint]


@dataclass(frozen=True)
class Diagram:
    boxes: tuple[Box, ...] = ()
    wires: tuple[Wire, ...] = ()
    inputs: tuple[TypeName, ...] = ()
    outputs: tuple[TypeName, ...] = ()
    circles: tuple[tuple[TypeName, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(
            self, "wires",
            tuple(sorted(self.wires, key=lambda w: (w[0].sort_key(), w[1].sort_key()))),
        )
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        circles = Counter()
        for t, n in dict(self.circles).items() if isinstance(self.circles, Mapping) else self.circles:
            circles[t] += n
        object.__setattr__(self, "circles", tuple(sorted((t, n) for t, n in circles.items() if n)))
        self._check()

    def box(self, box_id: int) -> Box:
        for b in self.boxes:
            if b.id == box_id:
                return b
        raise DiagramError(f"no box with id {box_id}")

    def endpoint_type(self, e: Endpoint) -> TypeName:
        if e.box is None:
            types = self.inputs if e.side == "in" else self.outputs
        else:
            b = self.box(e.box)
            types = b.ins if e.side == "in" else b.outs
        if not 0 <= e.port < len(types):
            raise DiagramError(f"endpoint {e} out of range")
        return types[e.port]

    def _check(self) -> None:
        ids = [b.id for b in self.boxes]
        if len(set(ids)) != len(ids):
            raise DiagramError("duplicate box ids")
        expected = {Endpoint.boundary("in", k) for k in range(len(self.inputs))}
        expected |= {Endpoint.boundary("out", k) for k in range(len(self.outputs))}
        for b in self.boxes:
            expected |= {Endpoint("in", q, b.id) for q in range(len(b.ins))}
            expected |= {Endpoint("out", p, b.id) for p in range(len(b.outs))}
        seen = Counter()
        for src, dst in self.wires:
            # a wire leaves a box output or the input boundary
            if (src.box is None) != (src.side == "in"):
                raise DiagramError(f"wire source {src} is not an output")
            if (dst.box is None) != (dst.side == "out"):
                raise DiagramError(f"wire target {dst} is not an input")
            ts, td = self.endpoint_type(src), self.endpoint_type(dst)
            if ts != td:
                raise TypeMismatchError(f"wire {src} -> {dst} joins types {ts} and {td}")
            seen[src] += 1
            seen[dst] += 1
        if set(seen) != expected or any(n != 1 for n in seen.values()):
            missing = sorted(expected - set(seen), key=Endpoint.sort_key)
            extra = sorted((e for e, n in seen.items() if n != 1 or e not in expected),
                           key=Endpoint.sort_key)
            raise DiagramError(f"endpoints not wired exactly once: missing {missing}, bad {extra}")


def to_diagram(
    e: EinsteinExpression,
    lower_order: Sequence[Label] | None = None,
    upper_order: Sequence[Label] | None = None,
) -> Diagram:
    """Diagram of ``e`` with boundaries ordered by the given free labels.

    Default orders sort the free labels.  Eliminable deltas are removed first
    since attaching a bare wire to a box changes nothing.
    """
    lower_order = sorted(e.free_lower) if lower_order is None else list(lower_order)
    upper_order = sorted(e.free_upper) if upper_order is None else list(upper_order)
    if set(lower_order) != e.free_lower or len(lower_order) != len(e.free_lower):
        raise DiagramError("lower boundary order must list the free lower labels once each")
    if set(upper_order) != e.free_upper or len(upper_order) != len(e.free_upper):
        raise DiagramError("upper boundary order must list the free upper labels once each")
    r = delta_reduce(e)
    in_pos = {l: k for k, l in enumerate(lower_order)}
    out_pos = {l: k for k, l in enumerate(upper_order)}
    boxes, src_of, dst_of = [], {}, {}
    circles = Counter()
    wires = []
    for f in r.factors:
        if isinstance(f, TensorSymbol):
            b = len(boxes)
            boxes.append(Box(b, f.name, f.in_types, f.out_types))
            for q, l in enumerate(f.lower):
                dst_of[l] = Endpoint("in", q, b)
            for p, l in enumerate(f.upper):
                src_of[l] = Endpoint("out", p, b)
        elif f.is_circle:
            circles[f.lower.type] += 1
        else:
            src_of[f.lower] = Endpoint.boundary("in", in_pos[f.lower])
            dst_of[f.upper] = Endpoint.boundary("out", out_pos[f.upper])
    for l, d in dst_of.items():
        if d.box is not None and l in in_pos:
            wires.append((Endpoint.boundary("in", in_pos[l]), d))
    for l, s in src_of.items():
        if s.box is not None and l in out_pos:
            wires.append((s, Endpoint.boundary("out", out_pos[l])))
    for f in r.factors:
        if isinstance(f, Delta) and not f.is_circle:
            wires.append((src_of[f.lower], dst_of[f.upper]))
    for l in r.bound:
        if l in src_of and l in dst_of:
            wires.append((src_of[l], dst_of[l]))
    return Diagram(
        tuple(boxes), tuple(wires),
        tuple(l.type for l in lower_order), tuple(l.type for l in upper_order),
        tuple(circles.items()),
    )


def from_diagram(
    d: Diagram,
    s: LabelSupply | None = None,
    lower_labels: Sequence[Label] | None = None,
    upper_labels: Sequence[Label] | None = None,
) -> EinsteinExpression:
    """An expression represented by ``d``.

    Boundary positions get ``lower_labels``/``upper_labels`` (canonical
    labels by default); every inner wire and circle gets a fresh label.
    """
    if lower_labels is None:
        lower_labels = [Label.canonical(t, k + 1, 0) for k, t in enumerate(d.inputs)]
    if upper_labels is None:
        upper_labels = [Label.canonical(t, k + 1, 1) for k, t in enumerate(d.outputs)]
    lower_labels, upper_labels = list(lower_labels), list(upper_labels)
    if [l.type for l in lower_labels] != list(d.inputs) or [l.type for l in upper_labels] != list(d.outputs):
        raise TypeMismatchError("boundary labels do not match the boundary types")
    s = (s or LabelSupply()).avoiding(lower_labels + upper_labels)
    label_at: dict[Endpoint, Label] = {}
    bare = []
    for src, dst in d.wires:
        if src.on_boundary and dst.on_boundary:
            bare.append(Delta(lower_labels[src.port], upper_labels[dst.port]))
        elif src.on_boundary:
            label_at[dst] = lower_labels[src.port]
        elif dst.on_boundary:
            label_at[src] = upper_labels[dst.port]
        else:
            l, s = s.fresh(d.endpoint_type(src))
            label_at[src] = label_at[dst] = l
    factors: list = []
    for b in d.boxes:
        factors.append(TensorSymbol(
            b.name,
            tuple(label_at[Endpoint("in", q, b.id)] for q in range(len(b.ins))),
            tuple(label_at[Endpoint("out", p, b.id)] for p in range(len(b.outs))),
        ))
    factors.extend(bare)
    for t, n in d.circles:
        for _ in range(n):
            l, s = s.fresh(t)
            factors.append(Delta(l, l))
    return EinsteinExpression(tuple(factors))


def _port_graph(d: Diagram) -> tuple[PortGraph, list]:
    index = {b.id: k for k, b in enumerate(d.boxes)}
    ins = [[None] * len(b.ins) for b in d.boxes]
    outs = [[None] * len(b.outs) for b in d.boxes]
    bare = []
    for src, dst in d.wires:
        if src.on_boundary and dst.on_boundary:
            bare.append((src.port, dst.port))
        elif src.on_boundary:
            ins[index[dst.box]][dst.port] = (PINNED, ("in", src.port))
        elif dst.on_boundary:
            outs[index[src.box]][src.port] = (PINNED, ("out", dst.port))
        else:
            ins[index[dst.box]][dst.port] = (WIRED, index[src.box], src.port)
            outs[index[src.box]][src.port] = (WIRED, index[dst.box], dst.port)
    keys = [(b.name, b.ins, b.outs) for b in d.boxes]
    return PortGraph(keys, ins, outs), sorted(bare)


def iso_invariant(d: Diagram) -> tuple:
    g, bare = _port_graph(d)
    encoding, _ = canonical_order(g)
    return d.inputs, d.outputs, d.circles, tuple(bare), encoding


def iso(d1: Diagram, d2: Diagram) -> bool:
    """Whether a box bijection matches names, port order, wiring, boundaries and circles."""
    return iso_invariant(d1) == iso_invariant(d2)


# -- serialisation -----------------------------------------------------------


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(d: Diagram) -> str:
    """Deterministic Graphviz DOT text for ``d``."""
    lines = ["digraph diagram {"]
    if d.boxes or d.inputs or d.outputs or d.circles:
        lines.append("  rankdir=BT;")
        lines.append('  node [shape=record, fontname="Helvetica"];')
    for b in sorted(d.boxes, key=lambda b: b.id):
        ins = "|".join(f"<i{q}> {t}" for q, t in enumerate(b.ins))
        outs = "|".join(f"<o{p}> {t}" for p, t in enumerate(b.outs))
        label = "{{" + ins + "}|" + b.name + "|{" + outs + "}}"
        lines.append(f"  b{b.id} [label={_dot_id(label)}];")
    if d.inputs:
        lines.extend(f"  in{k} [shape=point];" for k in range(len(d.inputs)))
        lines.append("  { rank=source; " + " ".join(f"in{k};" for k in range(len(d.inputs))) + " }")
    if d.outputs:
        lines.extend(f"  out{k} [shape=point];" for k in range(len(d.outputs)))
        lines.append("  { rank=sink; " + " ".join(f"out{k};" for k in range(len(d.outputs))) + " }")
    n = 0
    for t, count in d.circles:
        for _ in range(count):
            lines.append(f"  c{n} [shape=circle, label={_dot_id(t)}];")
            lines.append(f"  c{n} -> c{n};")
            n += 1

    def node(e: Endpoint) -> str:
        if e.box is None:
            return f"{e.side}{e.port}"
        return f"b{e.box}:{e.side[0]}{e.port}"

    for src, dst in d.wires:
        lines.append(f"  {node(src)} -> {node(dst)} [label={_dot_id(d.endpoint_type(src))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


_ENDPOINT_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "box": {"type": "integer"},
                "port": {"type": "integer", "minimum": 0},
                "side": {"enum": ["in", "out"]},
            },
            "required": ["box", "port", "side"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "boundary": {"enum": ["in", "out"]},
                "pos": {"type": "integer", "minimum": 0},
            },
            "required": ["boundary", "pos"],
            "additionalProperties": False,
        },
    ]
}

_TYPES = {"type": "array", "items": {"type": "string", "minLength": 1}}

DIAGRAM_SCHEMA = {
    "type": "object",
    "properties": {
        "types": _TYPES,
        "boxes": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "integer"},
                    "name": {"type": "string", "minLength": 1},
                    "ins": _TYPES,
                    "outs": _TYPES,
                },
                "required": ["id", "name", "ins", "outs"],
                "additionalProperties": False,
            },
        },
        "wires": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"from": _ENDPOINT_SCHEMA, "to": _ENDPOINT_SCHEMA},
                "required": ["from", "to"],
                "additionalProperties": False,
            },
        },
        "inputs": _TYPES,
        "outputs": _TYPES,
        "circles": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
    },
    "required": ["types", "boxes", "wires", "inputs", "outputs", "circles"],
    "additionalProperties": False,
}


def _endpoint_json(e: Endpoint) -> dict:
    if e.box is None:
        return {"boundary": e.side, "pos": e.port}
    return {"box": e.box, "port": e.port, "side": e.side}


def _endpoint_from_json(obj: dict) -> Endpoint:
    if "boundary" in obj:
        return Endpoint.boundary(obj["boundary"], obj["pos"])
    return Endpoint(obj["side"], obj["port"], obj["box"])


def diagram_types(d: Diagram) -> list[TypeName]:
    types = set(d.inputs) | set(d.outputs) | {t for t, _ in d.circles}
    for b in d.boxes:
        types |= set(b.ins) | set(b.outs)
    return sorted(types)


def diagram_json(d: Diagram) -> str:
    obj = {
        "types": diagram_types(d),
        "boxes": [{"id": b.id, "name": b.name, "ins": list(b.ins), "outs": list(b.outs)} for b in d.boxes],
        "wires": [{"from": _endpoint_json(s), "to": _endpoint_json(t)} for s, t in d.wires],
        "inputs": list(d.inputs),
        "outputs": list(d.outputs),
        "circles": dict(d.circles),
    }
    return json.dumps(obj, indent=2) + "\n"


def parse_diagram_json(text: str) -> Diagram:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramError(f"malformed JSON: {exc}") from None
    try:
        jsonschema.validate(obj, DIAGRAM_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise DiagramError(f"schema violation: {exc.message}") from None
    d = Diagram(
        tuple(Box(b["id"], b["name"], b["ins"], b["outs"]) for b in obj["boxes"]),
        tuple((_endpoint_from_json(w["from"]), _endpoint_from_json(w["to"])) for w in obj["wires"]),
        obj["inputs"],
        obj["outputs"],
        tuple(obj["circles"].items()),
    )
    undeclared = set(diagram_types(d)) - set(obj["types"])
    if undeclared:
        raise DiagramError(f"types not declared: {', '.join(sorted(undeclared))}")
    return d
