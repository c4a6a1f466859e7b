"""Bristol Fashion reader/writer.

Header: ``<gates> <wires>``, then ``<niv> <bits>...`` for inputs and
``<nov> <bits>...`` for outputs; outputs occupy the last wires.  The first
input group is the garbler's, any further groups belong to the evaluator.
"""
from __future__ import annotations

import numpy as np

from lanmpc.circuit.core import BooleanCircuit, CircuitError, GateKind

_OPCODES = {"XOR": GateKind.XOR, "AND": GateKind.AND, "INV": GateKind.INV}


def _ints(tokens: list[str], what: str) -> list[int]:
    try:
        vals = [int(t) for t in tokens]
    except ValueError:
        raise CircuitError(f"malformed {what}: {' '.join(tokens)!r}") from None
    if any(v < 0 for v in vals):
        raise CircuitError(f"negative value in {what}")
    return vals


def _arity_line(tokens: list[str], what: str) -> list[int]:
    vals = _ints(tokens, what)
    if not vals or vals[0] != len(vals) - 1:
        raise CircuitError(f"malformed {what} line: {' '.join(tokens)!r}")
    return vals[1:]


def parse_bristol(text: str) -> BooleanCircuit:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3:
        raise CircuitError("Bristol header needs counts, input and output lines")
    counts = _ints(lines[0], "header")
    if len(counts) != 2:
        raise CircuitError("first line must be '<gates> <wires>'")
    n_gates, n_wires = counts
    in_groups = _arity_line(lines[1], "input")
    out_groups = _arity_line(lines[2], "output")
    body = lines[3:]
    if len(body) != n_gates:
        raise CircuitError(f"header declares {n_gates} gates, found {len(body)}")

    kind = np.empty(n_gates, dtype=np.uint8)
    in0 = np.empty(n_gates, dtype=np.int64)
    in1 = np.full(n_gates, -1, dtype=np.int64)
    out = np.empty(n_gates, dtype=np.int64)
    for i, tok in enumerate(body):
        op = tok[-1]
        if op not in _OPCODES:
            raise CircuitError(f"gate {i}: unknown opcode {op!r}")
        vals = _ints(tok[:-1], f"gate {i}")
        k = _OPCODES[op]
        n_in, n_out = (1, 1) if k == GateKind.INV else (2, 1)
        if vals[:2] != [n_in, n_out] or len(vals) != 2 + n_in + n_out:
            raise CircuitError(f"gate {i}: bad arity for {op}")
        kind[i] = k
        in0[i] = vals[2]
        if n_in == 2:
            in1[i] = vals[3]
        out[i] = vals[-1]

    n_in_bits = sum(in_groups)
    g = in_groups[0] if in_groups else 0
    n_out_bits = sum(out_groups)
    if n_out_bits > n_wires:
        raise CircuitError("more output bits than wires")
    return BooleanCircuit(
        n_wires,
        range(0, g),
        range(g, n_in_bits),
        range(n_wires - n_out_bits, n_wires),
        kind,
        in0,
        in1,
        out,
    )


def load_bristol(path) -> BooleanCircuit:
    with open(path) as fh:
        return parse_bristol(fh.read())


def dump_bristol(circuit: BooleanCircuit, output_groups: list[int] | None = None) -> str:
    """Serialize, renumbering so inputs come first and outputs last.

    Gates producing output wires are moved to the end; this fails if any
    other gate consumes an output wire.
    """
    c = circuit.materialize()
    g, e = c.garbler_inputs, c.evaluator_inputs
    if g.start != 0 or (len(e) and e.start != g.stop):
        raise CircuitError("Bristol needs garbler inputs followed by evaluator inputs at wire 0")
    n_in = len(g) + len(e)
    outputs = c.outputs.tolist()
    if len(set(outputs)) != len(outputs) or any(w < n_in for w in outputs):
        raise CircuitError("outputs must be distinct gate outputs")

    out_pos = {w: i for i, w in enumerate(outputs)}
    is_out = np.array([w in out_pos for w in c.out.tolist()], dtype=bool)
    order = np.concatenate([np.flatnonzero(~is_out), np.flatnonzero(is_out)])
    body_ids = n_in + np.arange(int((~is_out).sum()))
    new_id = {}
    for w, nid in zip(c.out[order[: len(body_ids)]].tolist(), body_ids.tolist()):
        new_id[w] = nid
    n_wires = n_in + c.num_gates
    for w, pos in out_pos.items():
        new_id[w] = n_wires - len(outputs) + pos
    for w in range(n_in):
        new_id[w] = w

    written = set(range(n_in))
    lines = []
    for i in order.tolist():
        k = GateKind(int(c.kind[i]))
        srcs = [int(c.in0[i])] if k == GateKind.INV else [int(c.in0[i]), int(c.in1[i])]
        if any(new_id[s] not in written for s in srcs):
            raise CircuitError("an output wire feeds another gate; cannot place outputs last")
        o = new_id[int(c.out[i])]
        written.add(o)
        lines.append(" ".join(map(str, [len(srcs), 1, *(new_id[s] for s in srcs), o, k.name])))

    groups = [len(g)] + ([len(e)] if len(e) else [])
    outs = output_groups or [len(outputs)]
    if sum(outs) != len(outputs):
        raise CircuitError("output groups do not cover the outputs")
    header = [
        f"{c.num_gates} {n_wires}",
        " ".join(map(str, [len(groups), *groups])),
        " ".join(map(str, [len(outs), *outs])),
        "",
    ]
    return "\n".join(header + lines) + "\n"
