"""Numpy fallback for the garbling kernels.

Hashing goes through OpenSSL's AES-ECB in one call per batch.  Gate chunks are
regrouped into hazard-free levels so each level is a handful of vector
operations; the tables still land at their gate-order positions, so the output
is byte-identical to the compiled in-order kernel.
"""
from __future__ import annotations

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

NAME = "python"

XOR, AND, INV = 0, 1, 2

_ZERO_KEY = bytes(16)


def _aes_zero(data: bytes) -> bytes:
    enc = Cipher(algorithms.AES(_ZERO_KEY), modes.ECB()).encryptor()
    return enc.update(data) + enc.finalize()


def cpu_supported() -> bool:
    return True


def _lanes(blocks: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(blocks, dtype=np.uint8).reshape(-1, 16).view("<u8")


def hash_batch(labels, tweaks) -> np.ndarray:
    x = _lanes(labels)
    tw = np.ascontiguousarray(tweaks, dtype=np.uint64).reshape(-1)
    if x.shape[0] != tw.shape[0]:
        raise ValueError(f"{x.shape[0]} labels but {tw.shape[0]} tweaks")
    if x.shape[0] == 0:
        return np.empty((0, 16), dtype=np.uint8)
    lo, hi = x[:, 0], x[:, 1]
    k = np.empty_like(x)
    k[:, 0] = ((lo << np.uint64(1)) | (hi >> np.uint64(63))) ^ tw
    k[:, 1] = (hi << np.uint64(1)) | (lo >> np.uint64(63))
    enc = np.frombuffer(_aes_zero(k.tobytes()), dtype="<u8").reshape(-1, 2)
    return (enc ^ k).view(np.uint8).reshape(-1, 16)


def _lsb(blocks: np.ndarray) -> np.ndarray:
    return (blocks[:, 0] & 1).astype(bool)


def _where(mask: np.ndarray, value: np.ndarray) -> np.ndarray:
    return np.where(mask[:, None], value, np.uint8(0))


def garble_and_batch(a0, b0, delta, first_index: int):
    a = np.ascontiguousarray(a0, dtype=np.uint8).reshape(-1, 16)
    b = np.ascontiguousarray(b0, dtype=np.uint8).reshape(-1, 16)
    if b.shape[0] != a.shape[0]:
        raise ValueError("label batches differ in length")
    d = np.asarray(delta, dtype=np.uint8).reshape(16)
    return _garble_ranked(a, b, d, first_index + np.arange(a.shape[0], dtype=np.uint64))


def eval_and_batch(a, b, tables, first_index: int) -> np.ndarray:
    x = np.ascontiguousarray(a, dtype=np.uint8).reshape(-1, 16)
    y = np.ascontiguousarray(b, dtype=np.uint8).reshape(-1, 16)
    tab = np.ascontiguousarray(tables, dtype=np.uint8).reshape(-1, 32)
    if y.shape[0] != x.shape[0] or tab.shape[0] != x.shape[0]:
        raise ValueError("label and table batches differ in length")
    return _eval_ranked(x, y, tab, first_index + np.arange(x.shape[0], dtype=np.uint64))


def _levels(kind, in0, in1, out) -> np.ndarray:
    """Assign each gate a level such that running levels in order, each as
    gather-all / compute / scatter-all, matches in-order execution."""
    written: dict[int, int] = {}
    read: dict[int, int] = {}
    level = []
    for k, a, b, o in zip(kind.tolist(), in0.tolist(), in1.tolist(), out.tolist()):
        lv = written.get(a, -1) + 1
        if k != INV:
            lv = max(lv, written.get(b, -1) + 1)
        lv = max(lv, read.get(o, 0), written.get(o, -1) + 1)
        read[a] = max(read.get(a, 0), lv)
        if k != INV:
            read[b] = max(read.get(b, 0), lv)
        written[o] = lv
        level.append(lv)
    return np.asarray(level, dtype=np.int64)


def _schedule(kind, in0, in1, out):
    level = _levels(kind, in0, in1, out)
    order = np.argsort(level, kind="stable")
    cuts = np.flatnonzero(np.diff(level[order])) + 1
    and_rank = np.cumsum(kind == AND) - 1
    return np.split(order, cuts), and_rank


def garble_gates(kind, in0, in1, out, labels, delta, first_index, tables) -> int:
    kind = np.asarray(kind)
    if kind.size == 0:
        return 0
    d = np.asarray(delta, dtype=np.uint8).reshape(16)
    tab = np.asarray(tables).reshape(-1, 32)
    groups, and_rank = _schedule(kind, in0, in1, out)
    for idx in groups:
        k = kind[idx]
        a = labels[in0[idx]]
        b = labels[np.where(k == INV, in0[idx], in1[idx])]
        res = a ^ b
        inv = k == INV
        res[inv] = a[inv] ^ d
        is_and = k == AND
        if is_and.any():
            ranks = and_rank[idx[is_and]]
            t, c = _garble_ranked(a[is_and], b[is_and], d, first_index + ranks)
            tab[ranks] = t
            res[is_and] = c
        labels[out[idx]] = res
    return int(and_rank[-1] + 1)


def eval_gates(kind, in0, in1, out, labels, first_index, tables) -> int:
    kind = np.asarray(kind)
    if kind.size == 0:
        return 0
    tab = np.asarray(tables).reshape(-1, 32)
    groups, and_rank = _schedule(kind, in0, in1, out)
    for idx in groups:
        k = kind[idx]
        a = labels[in0[idx]]
        b = labels[np.where(k == INV, in0[idx], in1[idx])]
        res = a ^ b
        inv = k == INV
        res[inv] = a[inv]
        is_and = k == AND
        if is_and.any():
            ranks = and_rank[idx[is_and]]
            res[is_and] = _eval_ranked(a[is_and], b[is_and], tab[ranks], first_index + ranks)
        labels[out[idx]] = res
    return int(and_rank[-1] + 1)


def _garble_ranked(a, b, d, gate_index):
    j = np.uint64(2) * np.asarray(gate_index).astype(np.uint64)
    n = a.shape[0]
    h = hash_batch(np.concatenate([a, a ^ d, b, b ^ d]),
                   np.concatenate([j, j, j + np.uint64(1), j + np.uint64(1)]))
    ha0, ha1, hb0, hb1 = h[:n], h[n : 2 * n], h[2 * n : 3 * n], h[3 * n :]
    pa, pb = _lsb(a), _lsb(b)
    tg = ha0 ^ ha1 ^ _where(pb, np.broadcast_to(d, a.shape))
    te = hb0 ^ hb1 ^ a
    c = ha0 ^ _where(pa, tg) ^ hb0 ^ _where(pb, te ^ a)
    return np.concatenate([tg, te], axis=1), c


def _eval_ranked(a, b, tab, gate_index):
    j = np.uint64(2) * np.asarray(gate_index).astype(np.uint64)
    n = a.shape[0]
    h = hash_batch(np.concatenate([a, b]), np.concatenate([j, j + np.uint64(1)]))
    return h[:n] ^ _where(_lsb(a), tab[:, :16]) ^ h[n:] ^ _where(_lsb(b), tab[:, 16:] ^ a)


def plain_gates(kind, in0, in1, out, bits) -> None:
    for k, a, b, o in zip(kind.tolist(), in0.tolist(), in1.tolist(), out.tolist()):
        if k == XOR:
            bits[o] = bits[a] ^ bits[b]
        elif k == AND:
            bits[o] = bits[a] & bits[b]
        else:
            bits[o] = bits[a] ^ 1


def and_depth(kind, in0, in1, out, depth) -> int:
    best = 0
    for k, a, b, o in zip(kind.tolist(), in0.tolist(), in1.tolist(), out.tolist()):
        d = depth[a]
        if k != INV and depth[b] > d:
            d = depth[b]
        if k == AND:
            d += 1
        depth[o] = d
        if d > best:
            best = d
    return int(best)
