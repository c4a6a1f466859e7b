"""Gate-at-a-time circuit construction and the integer arithmetic fragments."""
from __future__ import annotations

from typing import Sequence

from lanmpc.circuit.core import BooleanCircuit, CircuitError, GateKind

SUPPORTED_WIDTHS = (8, 16, 32, 64)


class CircuitBuilder:
    """Allocates wires sequentially: garbler inputs, evaluator inputs, then one
    wire per emitted gate."""

    def __init__(self, garbler_inputs: int = 0, evaluator_inputs: int = 0):
        self.garbler_inputs = range(0, garbler_inputs)
        self.evaluator_inputs = range(garbler_inputs, garbler_inputs + evaluator_inputs)
        self._next = garbler_inputs + evaluator_inputs
        self._kind: list[int] = []
        self._in0: list[int] = []
        self._in1: list[int] = []

    def _emit(self, kind: GateKind, a: int, b: int) -> int:
        self._kind.append(kind)
        self._in0.append(a)
        self._in1.append(b)
        w = self._next
        self._next += 1
        return w

    def xor(self, a: int, b: int) -> int:
        return self._emit(GateKind.XOR, a, b)

    def and_(self, a: int, b: int) -> int:
        return self._emit(GateKind.AND, a, b)

    def inv(self, a: int) -> int:
        return self._emit(GateKind.INV, a, -1)

    def build(self, outputs: Sequence[int]) -> BooleanCircuit:
        first = self.evaluator_inputs.stop
        return BooleanCircuit(
            self._next,
            self.garbler_inputs,
            self.evaluator_inputs,
            outputs,
            self._kind,
            self._in0,
            self._in1,
            range(first, self._next),
        )


def add_words(b: CircuitBuilder, xs: Sequence[int], ys: Sequence[int]) -> list[int]:
    """Ripple-carry sum mod 2**len(xs): no carry into bit 0, no carry out, so
    exactly len(xs) - 1 AND gates."""
    if len(xs) != len(ys):
        raise CircuitError("operand widths differ")
    if not xs:
        return []
    out = [b.xor(xs[0], ys[0])]
    if len(xs) == 1:
        return out
    carry = b.and_(xs[0], ys[0])
    last = len(xs) - 1
    for i in range(1, len(xs)):
        ta = b.xor(xs[i], carry)
        out.append(b.xor(ta, ys[i]))
        if i < last:
            tb = b.xor(ys[i], carry)
            carry = b.xor(b.and_(ta, tb), carry)
    return out


def mul_words(b: CircuitBuilder, xs: Sequence[int], ys: Sequence[int]) -> list[int]:
    """Schoolbook product truncated to len(xs) bits."""
    if len(xs) != len(ys):
        raise CircuitError("operand widths differ")
    w = len(xs)
    acc = [b.and_(xs[j], ys[0]) for j in range(w)]
    for i in range(1, w):
        partial = [b.and_(xs[j], ys[i]) for j in range(w - i)]
        acc[i:] = add_words(b, acc[i:], partial)
    return acc


def _check_width(bitwidth: int) -> None:
    if bitwidth not in SUPPORTED_WIDTHS:
        raise CircuitError(f"unsupported bitwidth {bitwidth}; expected one of {SUPPORTED_WIDTHS}")


def _binary_fragment(bitwidth: int, op) -> BooleanCircuit:
    _check_width(bitwidth)
    b = CircuitBuilder(bitwidth, bitwidth)
    return b.build(op(b, list(b.garbler_inputs), list(b.evaluator_inputs)))


def builder_add(bitwidth: int) -> BooleanCircuit:
    """``a + b mod 2**bitwidth``; ``a`` is the garbler's word, ``b`` the evaluator's."""
    return _binary_fragment(bitwidth, add_words)


def builder_mul(bitwidth: int) -> BooleanCircuit:
    """``a * b mod 2**bitwidth``."""
    return _binary_fragment(bitwidth, mul_words)
