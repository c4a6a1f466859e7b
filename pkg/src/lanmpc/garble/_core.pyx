# cython: language_level=3, boundscheck=False, wraparound=False
"""AES-NI garbling kernels.

Same call signatures as :mod:`lanmpc.garble._pykernels`; arrays are C-contiguous
``uint8`` blocks of shape ``(n, 16)`` and ``int64`` wire/slot indices.
"""
import numpy as np

from libc.stdint cimport int64_t, uint8_t, uint64_t


cdef extern from "gc_core.h":
    int gc_cpu_has_aesni()
    void gc_hash_batch(const uint8_t *inp, const uint64_t *tweaks, uint8_t *out,
                       int64_t n) nogil
    void gc_garble_and_batch(const uint8_t *a0, const uint8_t *b0, const uint8_t *delta,
                             uint64_t first_index, int64_t n, uint8_t *tables,
                             uint8_t *c0) nogil
    void gc_eval_and_batch(const uint8_t *a, const uint8_t *b, const uint8_t *tables,
                           uint64_t first_index, int64_t n, uint8_t *c) nogil
    int64_t gc_garble_gates(int64_t n, const uint8_t *kind, const int64_t *in0,
                            const int64_t *in1, const int64_t *out, uint8_t *labels,
                            const uint8_t *delta, uint64_t first_index,
                            uint8_t *tables) nogil
    int64_t gc_eval_gates(int64_t n, const uint8_t *kind, const int64_t *in0,
                          const int64_t *in1, const int64_t *out, uint8_t *labels,
                          uint64_t first_index, const uint8_t *tables) nogil
    void gc_plain_gates(int64_t n, const uint8_t *kind, const int64_t *in0,
                        const int64_t *in1, const int64_t *out, uint8_t *bits) nogil
    int64_t gc_and_depth(int64_t n, const uint8_t *kind, const int64_t *in0,
                         const int64_t *in1, const int64_t *out, int64_t *depth) nogil


NAME = "compiled"


def cpu_supported():
    return bool(gc_cpu_has_aesni())


def hash_batch(labels, tweaks):
    blocks = np.ascontiguousarray(labels, dtype=np.uint8).reshape(-1, 16)
    tw = np.ascontiguousarray(tweaks, dtype=np.uint64)
    if blocks.shape[0] != tw.shape[0]:
        raise ValueError(f"{blocks.shape[0]} labels but {tw.shape[0]} tweaks")
    out = np.empty_like(blocks)
    cdef int64_t n = blocks.shape[0]
    if n == 0:
        return out
    cdef const uint8_t[::1] src = blocks.reshape(-1)
    cdef const uint64_t[::1] t = tw
    cdef uint8_t[::1] dst = out.reshape(-1)
    with nogil:
        gc_hash_batch(&src[0], &t[0], &dst[0], n)
    return out


def garble_and_batch(a0, b0, delta, uint64_t first_index):
    a = np.ascontiguousarray(a0, dtype=np.uint8).reshape(-1, 16)
    b = np.ascontiguousarray(b0, dtype=np.uint8).reshape(-1, 16)
    cdef int64_t n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("label batches differ in length")
    tables = np.empty((n, 32), dtype=np.uint8)
    c0 = np.empty((n, 16), dtype=np.uint8)
    if n == 0:
        return tables, c0
    cdef const uint8_t[::1] av = a.reshape(-1)
    cdef const uint8_t[::1] bv = b.reshape(-1)
    cdef const uint8_t[::1] dv = np.ascontiguousarray(delta, dtype=np.uint8).reshape(16)
    cdef uint8_t[::1] tv = tables.reshape(-1)
    cdef uint8_t[::1] cv = c0.reshape(-1)
    with nogil:
        gc_garble_and_batch(&av[0], &bv[0], &dv[0], first_index, n, &tv[0], &cv[0])
    return tables, c0


def eval_and_batch(a, b, tables, uint64_t first_index):
    x = np.ascontiguousarray(a, dtype=np.uint8).reshape(-1, 16)
    y = np.ascontiguousarray(b, dtype=np.uint8).reshape(-1, 16)
    tab = np.ascontiguousarray(tables, dtype=np.uint8).reshape(-1, 32)
    cdef int64_t n = x.shape[0]
    if y.shape[0] != n or tab.shape[0] != n:
        raise ValueError("label and table batches differ in length")
    c = np.empty((n, 16), dtype=np.uint8)
    if n == 0:
        return c
    cdef const uint8_t[::1] xv = x.reshape(-1)
    cdef const uint8_t[::1] yv = y.reshape(-1)
    cdef const uint8_t[::1] tv = tab.reshape(-1)
    cdef uint8_t[::1] cv = c.reshape(-1)
    with nogil:
        gc_eval_and_batch(&xv[0], &yv[0], &tv[0], first_index, n, &cv[0])
    return c


def garble_gates(const uint8_t[::1] kind, const int64_t[::1] in0, const int64_t[::1] in1,
                 const int64_t[::1] out, uint8_t[:, ::1] labels, delta,
                 uint64_t first_index, uint8_t[::1] tables):
    """Garble a gate chunk in order, writing 32-byte tables into ``tables``."""
    cdef int64_t n = kind.shape[0]
    cdef const uint8_t[::1] dv = np.ascontiguousarray(delta, dtype=np.uint8).reshape(16)
    cdef int64_t ands
    if n == 0:
        return 0
    with nogil:
        ands = gc_garble_gates(n, &kind[0], &in0[0], &in1[0], &out[0], &labels[0, 0],
                               &dv[0], first_index,
                               &tables[0] if tables.shape[0] else NULL)
    return ands


def eval_gates(const uint8_t[::1] kind, const int64_t[::1] in0, const int64_t[::1] in1,
               const int64_t[::1] out, uint8_t[:, ::1] labels, uint64_t first_index,
               const uint8_t[::1] tables):
    cdef int64_t n = kind.shape[0]
    cdef int64_t ands
    if n == 0:
        return 0
    with nogil:
        ands = gc_eval_gates(n, &kind[0], &in0[0], &in1[0], &out[0], &labels[0, 0],
                             first_index, &tables[0] if tables.shape[0] else NULL)
    return ands


def plain_gates(const uint8_t[::1] kind, const int64_t[::1] in0, const int64_t[::1] in1,
                const int64_t[::1] out, uint8_t[::1] bits):
    cdef int64_t n = kind.shape[0]
    if n == 0:
        return
    with nogil:
        gc_plain_gates(n, &kind[0], &in0[0], &in1[0], &out[0], &bits[0])


def and_depth(const uint8_t[::1] kind, const int64_t[::1] in0, const int64_t[::1] in1,
              const int64_t[::1] out, int64_t[::1] depth):
    cdef int64_t n = kind.shape[0]
    cdef int64_t best = 0
    if n == 0:
        return 0
    with nogil:
        best = gc_and_depth(n, &kind[0], &in0[0], &in1[0], &out[0], &depth[0])
    return best
