"""Tweakable correlation-robust hash used by the AND gates.

``H(X, i) = AES_0(K) ^ K`` with ``K = rotl1(X) ^ i``, where ``AES_0`` is AES-128
under the all-zero key.  Scalar labels are Python ints in ``[0, 2**128)``;
batches are ``(n, 16)`` uint8 arrays holding the little-endian encoding.
"""
from __future__ import annotations

import threading

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from lanmpc.garble._backend import kernels

MASK128 = (1 << 128) - 1

_local = threading.local()


def _encryptor():
    enc = getattr(_local, "enc", None)
    if enc is None:
        enc = _local.enc = Cipher(algorithms.AES(bytes(16)), modes.ECB()).encryptor()
    return enc


def to_block(label: int) -> bytes:
    return label.to_bytes(16, "little")


def from_block(block) -> int:
    return int.from_bytes(bytes(block), "little")


def hash(label: int, tweak: int) -> int:  # noqa: A001 - mirrors the protocol's H
    k = (((label << 1) | (label >> 127)) & MASK128) ^ tweak
    return from_block(_encryptor().update(to_block(k))) ^ k


def hash_batch(labels, tweaks) -> np.ndarray:
    """Elementwise :func:`hash` over an ``(n, 16)`` block array."""
    return kernels.hash_batch(labels, tweaks)


def blocks_from_ints(labels) -> np.ndarray:
    buf = b"".join(to_block(x) for x in labels)
    return np.frombuffer(buf, dtype=np.uint8).reshape(-1, 16).copy()


def ints_from_blocks(blocks) -> list[int]:
    raw = np.ascontiguousarray(blocks, dtype=np.uint8).tobytes()
    return [int.from_bytes(raw[i : i + 16], "little") for i in range(0, len(raw), 16)]
