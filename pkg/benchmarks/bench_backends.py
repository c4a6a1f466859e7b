"""Compare the compiled AES-NI kernels with the numpy fallback.

Runs each kernel on the same inputs, checks the outputs agree, and prints
one CSV row per (kernel, backend) pair.

    python benchmarks/bench_backends.py [--ands 200000] [--reps 3]
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from lanmpc.circuit import build_matvec
from lanmpc.garble._backend import available


def _best(fn, reps):
    best = float("inf")
    out = None
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ands", type=int, default=200_000, help="independent AND gates")
    ap.add_argument("--matvec", type=int, default=16, help="square matvec side for the gate-list kernel")
    ap.add_argument("--reps", type=int, default=3)
    args = ap.parse_args(argv)

    backends = available()
    rng = np.random.default_rng(0)
    n = args.ands
    a0 = rng.integers(0, 256, (n, 16), dtype=np.uint8)
    b0 = rng.integers(0, 256, (n, 16), dtype=np.uint8)
    delta = rng.integers(0, 256, 16, dtype=np.uint8)
    delta[0] |= 1
    tweaks = np.arange(n, dtype=np.uint64)

    circuit = build_matvec(args.matvec, args.matvec, 32)
    chunks = list(circuit.execution_chunks())
    n_gates = circuit.num_gates

    def run_circuit(k):
        labels = np.zeros((circuit.num_slots, 16), dtype=np.uint8)
        labels[: len(circuit.garbler_inputs) + len(circuit.evaluator_inputs)] = 7
        idx = 0
        for ch in chunks:
            tables = np.empty(32 * int((ch.kind == 1).sum()), dtype=np.uint8)
            idx += k.garble_gates(ch.kind, ch.in0, ch.in1, ch.out, labels, delta, idx, tables)
        return labels[circuit.output_slots]

    results = {}
    print("kernel,backend,items,seconds,items_per_second")
    for name, k in backends.items():
        cases = {
            "hash_batch": (n, lambda: k.hash_batch(a0, tweaks)),
            "garble_and_batch": (n, lambda: k.garble_and_batch(a0, b0, delta, 0)[1]),
            "garble_gates": (n_gates, lambda: run_circuit(k)),
        }
        for kernel, (items, fn) in cases.items():
            secs, out = _best(fn, args.reps)
            results.setdefault(kernel, {})[name] = out
            print(f"{kernel},{name},{items},{secs:.6f},{items / secs:.0f}")

    for kernel, outs in results.items():
        vals = list(outs.values())
        if any(not np.array_equal(vals[0], v) for v in vals[1:]):
            print(f"MISMATCH in {kernel}", file=sys.stderr)
            return 1
    if len(backends) < 2:
        print("compiled kernels unavailable; only the fallback was measured", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
