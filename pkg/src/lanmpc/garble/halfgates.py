"""Scalar free-XOR / half-gates operations on integer labels.

These are the reference definitions; the batched kernels must agree with them
bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass

from lanmpc.garble.hashing import from_block, hash, to_block

TABLE_BYTES = 32


@dataclass(frozen=True)
class GarbledAndTable:
    generator: int
    evaluator: int

    def to_bytes(self) -> bytes:
        return to_block(self.generator) + to_block(self.evaluator)

    @classmethod
    def from_bytes(cls, data) -> "GarbledAndTable":
        data = bytes(data)
        if len(data) != TABLE_BYTES:
            raise ValueError(f"garbled AND table is {TABLE_BYTES} bytes, got {len(data)}")
        return cls(from_block(data[:16]), from_block(data[16:]))


def garble_xor(a0: int, b0: int) -> int:
    return a0 ^ b0


def eval_xor(a: int, b: int) -> int:
    return a ^ b


def garble_and(a0: int, b0: int, delta: int, gate_index: int) -> tuple[GarbledAndTable, int]:
    if not delta & 1:
        raise ValueError("delta must have its least significant bit set")
    j, jj = 2 * gate_index, 2 * gate_index + 1
    pa, pb = a0 & 1, b0 & 1
    ha0 = hash(a0, j)
    hb0 = hash(b0, jj)
    tg = ha0 ^ hash(a0 ^ delta, j) ^ (delta if pb else 0)
    wg = ha0 ^ (tg if pa else 0)
    te = hb0 ^ hash(b0 ^ delta, jj) ^ a0
    we = hb0 ^ ((te ^ a0) if pb else 0)
    return GarbledAndTable(tg, te), wg ^ we


def eval_and(a: int, b: int, table: GarbledAndTable, gate_index: int) -> int:
    c = hash(a, 2 * gate_index) ^ hash(b, 2 * gate_index + 1)
    if a & 1:
        c ^= table.generator
    if b & 1:
        c ^= table.evaluator ^ a
    return c
