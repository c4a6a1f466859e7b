"""Matrix-vector product circuits, generated on demand from two templates.

``y[r] = sum_c M[r][c] * v[c] mod 2**bitwidth``.  The garbler holds ``M``
(row-major, little-endian words), the evaluator holds ``v``.  Each row runs
``mul(r, 0)``, then ``mul(r, c), add(r, c)`` for ``c = 1 .. cols-1``.

The full gate list of a 1024x1024 product has billions of gates, so it is
never stored.  Two numberings are produced on the fly:

* logical wires: every gate writes a fresh id, exactly as a materialized
  :class:`BooleanCircuit` would;
* execution slots: template-internal wires reuse one scratch region per
  template, products and running sums go through small port regions, and
  only final results get dedicated slots.  Valid only when gates run in
  list order, which every engine guarantees.
"""
from __future__ import annotations

from functools import cached_property
from typing import Iterator

import numpy as np

from lanmpc.circuit.builder import _check_width, builder_add, builder_mul
from lanmpc.circuit.core import (
    DEFAULT_CHUNK,
    BooleanCircuit,
    CircuitError,
    CircuitStats,
    GateChunk,
    GateKind,
)

_MAX_WIRES = 1 << 62
_NO_PATH = -(1 << 40)


class _Template:
    def __init__(self, frag: BooleanCircuit):
        self.width = len(frag.garbler_inputs)
        self.num_inputs = 2 * self.width
        self.num_gates = frag.num_gates
        self.kind = frag.kind
        self.in0 = frag.in0
        self.in1 = frag.in1
        self.out = frag.out
        self.outputs = frag.outputs
        self.stats = frag.stats()
        self.depth = self._depth_matrix()

    def _depth_matrix(self) -> np.ndarray:
        """Longest AND path from each input to each wire (``_NO_PATH`` if none)."""
        n_in = self.num_inputs
        d = np.full((n_in + self.num_gates, n_in), _NO_PATH, dtype=np.int64)
        d[np.arange(n_in), np.arange(n_in)] = 0
        for k, a, b, o in zip(self.kind.tolist(), self.in0.tolist(), self.in1.tolist(),
                              self.out.tolist()):
            row = d[a] if k == GateKind.INV else np.maximum(d[a], d[b])
            d[o] = row + 1 if k == GateKind.AND else row
        return d

    def propagate(self, in_depth: np.ndarray) -> tuple[np.ndarray, int]:
        """Output depths and overall max for given input depths."""
        reach = self.depth + in_depth[None, :]
        reach[self.depth <= _NO_PATH // 2] = _NO_PATH
        per_wire = reach.max(axis=1)
        return per_wire[self.outputs], int(max(per_wire.max(), 0))

    def instantiate(self, maps: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Gate endpoints for ``k`` instances given ``(k, wires)`` wire maps."""
        in0 = maps[:, self.in0]
        in1 = np.where(self.in1 >= 0, maps[:, np.maximum(self.in1, 0)], -1)
        out = maps[:, self.out]
        return in0, in1, out


class MatvecCircuit:
    """Lazily generated matrix-vector product circuit.

    Exposes the same read interface as :class:`BooleanCircuit` (wire ranges,
    outputs, :meth:`gate_chunks`, :meth:`stats`) plus the slot-compacted
    :meth:`execution_chunks` used by the protocol engines.
    """

    def __init__(self, rows: int, cols: int, bitwidth: int):
        if rows < 1 or cols < 1:
            raise CircuitError("rows and cols must be >= 1")
        _check_width(bitwidth)
        self.rows, self.cols, self.bitwidth = rows, cols, bitwidth
        self._mul = _Template(builder_mul(bitwidth))
        self._add = _Template(builder_add(bitwidth))
        w = bitwidth
        g = rows * cols * w
        e = cols * w
        self.garbler_inputs = range(0, g)
        self.evaluator_inputs = range(g, g + e)
        self._row_wires = cols * self._mul.num_gates + (cols - 1) * self._add.num_gates
        self.num_wires = g + e + rows * self._row_wires
        if self.num_wires >= _MAX_WIRES:
            raise CircuitError("matvec circuit overflows the wire-id space")

        # execution slot layout
        self._out_base = g + e
        self._port = self._out_base + rows * w
        self._acc = (self._port + w, self._port + 2 * w)
        self._mul_scratch = self._port + 3 * w
        self._add_scratch = self._mul_scratch + self._mul.num_gates
        self.num_slots = self._add_scratch + self._add.num_gates

    # -- wire bookkeeping ---------------------------------------------------

    def _matrix_wires(self, r: int, c: np.ndarray) -> np.ndarray:
        w = self.bitwidth
        return (r * self.cols + c)[:, None] * w + np.arange(w)

    def _vector_wires(self, c: np.ndarray) -> np.ndarray:
        w = self.bitwidth
        return self.garbler_inputs.stop + c[:, None] * w + np.arange(w)

    def _mul_base(self, r: int, c: np.ndarray) -> np.ndarray:
        step = self._mul.num_gates + self._add.num_gates
        first = self._out_base + r * self._row_wires
        return np.where(c == 0, first, first + self._mul.num_gates + (c - 1) * step)

    def _mul_out_logical(self, r: int, c: np.ndarray) -> np.ndarray:
        return self._mul_base(r, c)[:, None] + (self._mul.outputs - self._mul.num_inputs)

    def _add_out_logical(self, r: int, c: np.ndarray) -> np.ndarray:
        base = self._mul_base(r, c) + self._mul.num_gates
        return base[:, None] + (self._add.outputs - self._add.num_inputs)

    @cached_property
    def outputs(self) -> np.ndarray:
        last = np.array([self.cols - 1])
        rows = [
            (self._mul_out_logical(r, last) if self.cols == 1 else self._add_out_logical(r, last))
            for r in range(self.rows)
        ]
        return np.concatenate(rows, axis=None).astype(np.int64)

    @cached_property
    def output_slots(self) -> np.ndarray:
        return np.arange(self._out_base, self._port, dtype=np.int64)

    @property
    def garbler_input_slots(self) -> np.ndarray:
        return np.arange(self.garbler_inputs.start, self.garbler_inputs.stop, dtype=np.int64)

    @property
    def evaluator_input_slots(self) -> np.ndarray:
        return np.arange(
            self.evaluator_inputs.start, self.evaluator_inputs.stop, dtype=np.int64
        )

    def _result_slots(self, r: int) -> np.ndarray:
        w = self.bitwidth
        return self._out_base + r * w + np.arange(w)

    def _port_slots(self, base: int) -> np.ndarray:
        return base + np.arange(self.bitwidth)

    # -- gate generation ----------------------------------------------------

    def _mul_maps(self, r: int, cs: np.ndarray, slots: bool) -> np.ndarray:
        t = self._mul
        w = self.bitwidth
        maps = np.empty((len(cs), t.num_inputs + t.num_gates), dtype=np.int64)
        maps[:, :w] = self._matrix_wires(r, cs)
        maps[:, w : 2 * w] = self._vector_wires(cs)
        if not slots:
            maps[:, 2 * w :] = self._mul_base(r, cs)[:, None] + np.arange(t.num_gates)
            return maps
        maps[:, 2 * w :] = self._mul_scratch + np.arange(t.num_gates)
        for i, c in enumerate(cs.tolist()):
            if self.cols == 1:
                dest = self._result_slots(r)
            elif c == 0:
                dest = self._port_slots(self._acc[0])
            else:
                dest = self._port_slots(self._port)
            maps[i, t.outputs] = dest
        return maps

    def _add_maps(self, r: int, cs: np.ndarray, slots: bool) -> np.ndarray:
        t = self._add
        w = self.bitwidth
        maps = np.empty((len(cs), t.num_inputs + t.num_gates), dtype=np.int64)
        if not slots:
            prev = np.where(cs == 1, 0, cs - 1)
            acc_in = np.where(
                (cs == 1)[:, None], self._mul_out_logical(r, prev), self._add_out_logical(r, prev)
            )
            maps[:, :w] = acc_in
            maps[:, w : 2 * w] = self._mul_out_logical(r, cs)
            maps[:, 2 * w :] = (self._mul_base(r, cs) + self._mul.num_gates)[:, None] + np.arange(
                t.num_gates
            )
            return maps
        maps[:, 2 * w :] = self._add_scratch + np.arange(t.num_gates)
        maps[:, w : 2 * w] = self._port_slots(self._port)
        for i, c in enumerate(cs.tolist()):
            src = self._acc[(c - 1) % 2]
            maps[i, :w] = self._port_slots(src)
            if c == self.cols - 1:
                maps[i, t.outputs] = self._result_slots(r)
            else:
                maps[i, t.outputs] = self._port_slots(self._acc[c % 2])
        return maps

    def _row_block(self, r: int, lo: int, hi: int, slots: bool) -> GateChunk:
        cs = np.arange(lo, hi)
        m_in0, m_in1, m_out = self._mul.instantiate(self._mul_maps(r, cs, slots))
        adds = cs[cs > 0]
        a_in0, a_in1, a_out = self._add.instantiate(self._add_maps(r, adds, slots))
        parts: list[tuple] = []
        ai = 0
        for i, c in enumerate(cs.tolist()):
            parts.append((self._mul.kind, m_in0[i], m_in1[i], m_out[i]))
            if c > 0:
                parts.append((self._add.kind, a_in0[ai], a_in1[ai], a_out[ai]))
                ai += 1
        return GateChunk(*(np.concatenate(col) for col in zip(*parts)))

    def _chunks(self, size: int, slots: bool) -> Iterator[GateChunk]:
        per_col = self._mul.num_gates + self._add.num_gates
        block = max(1, size // per_col)
        for r in range(self.rows):
            for lo in range(0, self.cols, block):
                yield self._row_block(r, lo, min(self.cols, lo + block), slots)

    def gate_chunks(self, size: int = DEFAULT_CHUNK) -> Iterator[GateChunk]:
        """Gates in list order over logical (write-once) wire ids."""
        return self._chunks(size, slots=False)

    def execution_chunks(self, size: int = DEFAULT_CHUNK) -> Iterator[GateChunk]:
        """Same gates in the same order, over compacted execution slots."""
        return self._chunks(size, slots=True)

    @property
    def num_gates(self) -> int:
        return self.rows * self._row_wires

    def materialize(self) -> BooleanCircuit:
        chunks = list(self.gate_chunks())
        cols = [np.concatenate(c) if c else np.empty(0, np.int64) for c in zip(*chunks)]
        return BooleanCircuit(
            self.num_wires, self.garbler_inputs, self.evaluator_inputs, self.outputs, *cols
        )

    @cached_property
    def _stats(self) -> CircuitStats:
        m, a = self._mul.stats, self._add.stats
        n_mul = self.rows * self.cols
        n_add = self.rows * (self.cols - 1)
        zeros = np.zeros(self._mul.num_inputs, dtype=np.int64)
        acc, best = self._mul.propagate(zeros)
        prod_depth = acc
        for _ in range(1, self.cols):
            acc, inner = self._add.propagate(np.concatenate([acc, prod_depth]))
            best = max(best, inner)
        return CircuitStats(
            and_count=n_mul * m.and_count + n_add * a.and_count,
            xor_count=n_mul * m.xor_count + n_add * a.xor_count,
            inv_count=n_mul * m.inv_count + n_add * a.inv_count,
            and_depth=best,
        )

    def stats(self) -> CircuitStats:
        return self._stats

    def __repr__(self) -> str:
        return (
            f"MatvecCircuit(rows={self.rows}, cols={self.cols}, bitwidth={self.bitwidth}, "
            f"gates={self.num_gates})"
        )


def build_matvec(rows: int, cols: int, bitwidth: int) -> MatvecCircuit:
    return MatvecCircuit(rows, cols, bitwidth)


def matvec_oracle(matrix, vector, bitwidth: int) -> np.ndarray:
    """Direct modular integer matvec, the reference for circuit and protocol runs."""
    m = np.asarray(matrix, dtype=np.uint64)
    v = np.asarray(vector, dtype=np.uint64)
    with np.errstate(over="ignore"):
        y = (m * v[None, :]).sum(axis=1, dtype=np.uint64)
    if bitwidth < 64:
        y &= np.uint64((1 << bitwidth) - 1)
    return y
