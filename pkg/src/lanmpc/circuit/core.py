"""Boolean circuits stored as parallel numpy gate arrays."""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from lanmpc.garble._backend import kernels

DEFAULT_CHUNK = 1 << 16


class CircuitError(ValueError):
    pass


class GateKind(IntEnum):
    XOR = 0
    AND = 1
    INV = 2


class Gate(NamedTuple):
    kind: GateKind
    inputs: tuple[int, ...]
    output: int


class GateChunk(NamedTuple):
    """A run of gates; ``in1`` is -1 for INV gates."""

    kind: np.ndarray
    in0: np.ndarray
    in1: np.ndarray
    out: np.ndarray

    def __len__(self) -> int:
        return len(self.kind)


@dataclass(frozen=True)
class CircuitStats:
    and_count: int
    xor_count: int
    inv_count: int
    and_depth: int

    @property
    def gate_count(self) -> int:
        return self.and_count + self.xor_count + self.inv_count


class BooleanCircuit:
    """Topologically ordered XOR/AND/INV gate list over integer wire ids.

    Garbler and evaluator inputs are disjoint contiguous wire ranges.  Every
    gate writes a fresh wire, so wire ids double as label-store slots.
    """

    def __init__(
        self,
        num_wires: int,
        garbler_inputs: range,
        evaluator_inputs: range,
        outputs: Sequence[int],
        kind,
        in0,
        in1,
        out,
    ):
        self.num_wires = int(num_wires)
        self.garbler_inputs = garbler_inputs
        self.evaluator_inputs = evaluator_inputs
        self.outputs = np.asarray(outputs, dtype=np.int64)
        self.kind = np.ascontiguousarray(kind, dtype=np.uint8)
        self.in0 = np.ascontiguousarray(in0, dtype=np.int64)
        self.in1 = np.ascontiguousarray(in1, dtype=np.int64)
        self.out = np.ascontiguousarray(out, dtype=np.int64)
        for arr in (self.outputs, self.kind, self.in0, self.in1, self.out):
            arr.setflags(write=False)
        self._stats: CircuitStats | None = None
        self._validate()

    def _validate(self) -> None:
        n = len(self.kind)
        if not (len(self.in0) == len(self.in1) == len(self.out) == n):
            raise CircuitError("gate arrays differ in length")
        if n and self.kind.max() > GateKind.INV:
            raise CircuitError("unknown gate kind")
        g, e = self.garbler_inputs, self.evaluator_inputs
        for r in (g, e):
            if r.step != 1 or r.start < 0 or r.stop > self.num_wires:
                raise CircuitError(f"input range {r} outside wire space")
        if len(g) and len(e) and g.start < e.stop and e.start < g.stop:
            raise CircuitError("garbler and evaluator input ranges overlap")

        # writer[w]: index of the gate writing w; -1 for inputs; n for undefined
        writer = np.full(self.num_wires, n, dtype=np.int64)
        writer[g.start : g.stop] = -1
        writer[e.start : e.stop] = -1
        if n:
            if self.out.min() < 0 or self.out.max() >= self.num_wires:
                raise CircuitError("gate output outside wire space")
            if (writer[self.out] == -1).any():
                raise CircuitError("gate writes an input wire")
            if len(np.unique(self.out)) != n:
                raise CircuitError("wire written twice")
            writer[self.out] = np.arange(n)
            order = np.arange(n)
            binary = self.kind != GateKind.INV
            for col, mask in ((self.in0, slice(None)), (self.in1, binary)):
                src = col[mask]
                if len(src) and (src.min() < 0 or src.max() >= self.num_wires):
                    raise CircuitError("gate input outside wire space")
                if (writer[src] >= order[mask]).any():
                    bad = int(np.flatnonzero(writer[src] >= order[mask])[0])
                    raise CircuitError(f"gate {int(order[mask][bad])} reads an undefined wire")
        if len(self.outputs) and (
            self.outputs.min() < 0
            or self.outputs.max() >= self.num_wires
            or (writer[self.outputs] == n).any()
        ):
            raise CircuitError("output wire is never defined")

    # -- execution interface shared with lazily generated circuits --------

    @property
    def num_gates(self) -> int:
        return len(self.kind)

    @property
    def num_slots(self) -> int:
        return self.num_wires

    @property
    def garbler_input_slots(self) -> np.ndarray:
        return np.arange(self.garbler_inputs.start, self.garbler_inputs.stop, dtype=np.int64)

    @property
    def evaluator_input_slots(self) -> np.ndarray:
        return np.arange(
            self.evaluator_inputs.start, self.evaluator_inputs.stop, dtype=np.int64
        )

    @property
    def output_slots(self) -> np.ndarray:
        return self.outputs

    def gate_chunks(self, size: int = DEFAULT_CHUNK) -> Iterator[GateChunk]:
        for lo in range(0, self.num_gates, size):
            hi = lo + size
            yield GateChunk(self.kind[lo:hi], self.in0[lo:hi], self.in1[lo:hi], self.out[lo:hi])

    execution_chunks = gate_chunks

    def materialize(self) -> "BooleanCircuit":
        return self

    # -- inspection ---------------------------------------------------------

    @property
    def gates(self) -> list[Gate]:
        return [
            Gate(GateKind(k), (a,) if k == GateKind.INV else (a, b), o)
            for k, a, b, o in zip(
                self.kind.tolist(), self.in0.tolist(), self.in1.tolist(), self.out.tolist()
            )
        ]

    @classmethod
    def from_gates(
        cls,
        num_wires: int,
        garbler_inputs: range,
        evaluator_inputs: range,
        outputs: Sequence[int],
        gates: Sequence[Gate],
    ) -> "BooleanCircuit":
        kind, in0, in1, out = [], [], [], []
        for g in gates:
            arity = 1 if g.kind == GateKind.INV else 2
            if len(g.inputs) != arity:
                raise CircuitError(f"{GateKind(g.kind).name} gate takes {arity} inputs")
            kind.append(int(g.kind))
            in0.append(g.inputs[0])
            in1.append(g.inputs[1] if arity == 2 else -1)
            out.append(g.output)
        return cls(num_wires, garbler_inputs, evaluator_inputs, outputs, kind, in0, in1, out)

    def stats(self) -> CircuitStats:
        if self._stats is None:
            counts = np.bincount(self.kind, minlength=3)
            depth = np.zeros(self.num_wires, dtype=np.int64)
            best = kernels.and_depth(self.kind, self.in0, self.in1, self.out, depth)
            self._stats = CircuitStats(
                and_count=int(counts[GateKind.AND]),
                xor_count=int(counts[GateKind.XOR]),
                inv_count=int(counts[GateKind.INV]),
                and_depth=int(best),
            )
        return self._stats

    def __repr__(self) -> str:
        return (
            f"BooleanCircuit(wires={self.num_wires}, gates={self.num_gates}, "
            f"garbler_inputs={len(self.garbler_inputs)}, "
            f"evaluator_inputs={len(self.evaluator_inputs)}, outputs={len(self.outputs)})"
        )


def stats(circuit) -> CircuitStats:
    return circuit.stats()


def _as_bits(bits, expected: int, who: str) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if len(arr) != expected:
        raise CircuitError(f"{who} input has {len(arr)} bits, circuit expects {expected}")
    if len(arr) and arr.max() > 1:
        raise CircuitError(f"{who} input bits must be 0 or 1")
    return arr


def eval_plaintext(circuit, garbler_bits, evaluator_bits) -> np.ndarray:
    """Evaluate gate by gate on cleartext bits; the reference for all protocols."""
    g = _as_bits(garbler_bits, len(circuit.garbler_inputs), "garbler")
    e = _as_bits(evaluator_bits, len(circuit.evaluator_inputs), "evaluator")
    wires = np.zeros(circuit.num_slots, dtype=np.uint8)
    wires[circuit.garbler_input_slots] = g
    wires[circuit.evaluator_input_slots] = e
    for chunk in circuit.execution_chunks():
        kernels.plain_gates(chunk.kind, chunk.in0, chunk.in1, chunk.out, wires)
    return wires[circuit.output_slots].copy()


def int_to_bits(values, bitwidth: int) -> np.ndarray:
    """Little-endian bit decomposition (bitwidth <= 64), value after value."""
    vals = np.asarray(values)
    if vals.dtype.kind not in "iu":
        vals = np.array([int(v) & ((1 << 64) - 1) for v in vals.reshape(-1)], dtype=np.uint64)
    raw = vals.reshape(-1).astype(np.uint64).view(np.uint8).reshape(-1, 8)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :bitwidth].reshape(-1)


def bits_to_int(bits, bitwidth: int) -> np.ndarray:
    """Inverse of :func:`int_to_bits`; returns uint64 values."""
    arr = np.asarray(bits, dtype=np.uint8).reshape(-1, bitwidth)
    padded = np.zeros((len(arr), 64), dtype=np.uint8)
    padded[:, :bitwidth] = arr
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").reshape(-1)
