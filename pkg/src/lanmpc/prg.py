"""Seedable AES-CTR keystream; the same seed always yields the same bytes."""
from __future__ import annotations

import hashlib
import os

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes


class Prg:
    def __init__(self, seed: int | bytes | str | None = None, *, domain: str = ""):
        if seed is None:
            key = os.urandom(16)
        else:
            if isinstance(seed, int):
                seed = seed.to_bytes((seed.bit_length() + 8) // 8, "little", signed=True)
            elif isinstance(seed, str):
                seed = seed.encode()
            key = hashlib.sha256(domain.encode() + b"\0" + seed).digest()[:16]
        self._enc = Cipher(algorithms.AES(key), modes.CTR(bytes(16))).encryptor()

    def bytes(self, n: int) -> bytes:
        return self._enc.update(bytes(n))

    def blocks(self, n: int) -> np.ndarray:
        return np.frombuffer(self.bytes(16 * n), dtype=np.uint8).reshape(n, 16).copy()

    def uint64(self, n: int) -> np.ndarray:
        return np.frombuffer(self.bytes(8 * n), dtype="<u8").astype(np.uint64)
