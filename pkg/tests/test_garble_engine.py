import itertools
import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_circuit, run_gc
from lanmpc.circuit import (
    BooleanCircuit,
    CircuitBuilder,
    bits_to_int,
    build_matvec,
    eval_plaintext,
    int_to_bits,
    matvec_oracle,
)
from lanmpc.garble import (
    Evaluator,
    FreeXorAudit,
    FreeXorViolation,
    Garbler,
    GateApi,
    InputMode,
    TrustedDelivery,
    run_evaluator,
    run_garbler,
    transcript_bytes,
)
from lanmpc.garble.hashing import blocks_from_ints
from lanmpc.transport import ChannelClosed, pair_in_memory


def anf_gate(c0, c1, c2, c3):
    """Circuit for f(x, y) = c0 ^ c1 x ^ c2 y ^ c3 xy from XOR/AND/INV only."""
    b = CircuitBuilder(1, 1)
    acc = b.inv(b.xor(0, 0)) if c0 else b.xor(0, 0)
    if c1:
        acc = b.xor(acc, 0)
    if c2:
        acc = b.xor(acc, 1)
    if c3:
        acc = b.xor(acc, b.and_(0, 1))
    return b.build([acc])


@pytest.mark.parametrize("coeffs", list(itertools.product((0, 1), repeat=4)))
def test_all_two_input_functions(coeffs):
    c = anf_gate(*coeffs)
    for x, y in itertools.product((0, 1), repeat=2):
        want = coeffs[0] ^ (coeffs[1] & x) ^ (coeffs[2] & y) ^ (coeffs[3] & x & y)
        assert run_gc(c, [x], [y])[0].tolist() == [want]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 64), st.sampled_from(["batched", "per-gate"]))
def test_random_circuits_match_plaintext(seed, n_gates, api):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, n_gates)
    g, e = rng.integers(0, 2, 4), rng.integers(0, 2, 4)
    kw = {"gate_api": api}
    out = run_gc(c, g, e, garbler_kw=kw, evaluator_kw=kw)[0]
    assert out.tolist() == eval_plaintext(c, g, e).tolist()


def test_matvec_2x2x8_against_oracle(rng):
    c = build_matvec(2, 2, 8)
    for _ in range(20):
        m, v = rng.integers(0, 256, (2, 2)), rng.integers(0, 256, 2)
        out = run_gc(c, int_to_bits(m.ravel(), 8), int_to_bits(v, 8))[0]
        assert bits_to_int(out, 8).tolist() == matvec_oracle(m, v, 8).tolist()


@pytest.mark.parametrize("mode", ["direct", "external"])
def test_transcript_exact(mode, rng):
    c = random_circuit(rng, 200, 7, 9, n_outputs=11)
    g, e = rng.integers(0, 2, 7), rng.integers(0, 2, 9)
    kw = {"input_mode": mode}
    if mode == "external":
        kw["delivery"] = TrustedDelivery()
    out, gs, es, _ = run_gc(c, g, e, garbler_kw=kw, evaluator_kw=kw)
    assert out.tolist() == eval_plaintext(c, g, e).tolist()
    n_labels = 7 + (9 if mode == "direct" else 0)
    fwd = 16 * n_labels + 32 * c.stats().and_count + math.ceil(11 / 8)
    bwd = 2 if mode == "direct" else 0
    assert gs.bytes_sent == es.bytes_received == fwd
    assert es.bytes_sent == gs.bytes_received == bwd
    assert transcript_bytes(c, mode) == {"forward": fwd, "backward": bwd}


def _xor_only(n_gates):
    kind = np.zeros(n_gates, np.uint8)
    in0 = np.concatenate([[0], np.arange(2, n_gates + 1)])
    in1 = np.ones(n_gates, np.int64)
    out = np.arange(2, n_gates + 2)
    kind[1::7] = 2  # sprinkle INV gates
    in1[1::7] = -1
    return BooleanCircuit(n_gates + 2, range(0, 1), range(1, 2), [n_gates + 1], kind, in0, in1, out)


def test_free_gates_cost_zero_bytes():
    c = _xor_only(10**6)
    out, gs, es, _ = run_gc(c, [1], [0])
    assert out.tolist() == eval_plaintext(c, [1], [0]).tolist()
    assert gs.bytes_sent == 16 * 2 + 1  # labels and one decode byte, nothing per gate


def test_audit_accepts_honest_run(rng):
    c = random_circuit(rng, 64)
    audit = FreeXorAudit()
    kw = {"audit": audit}
    run_gc(c, rng.integers(0, 2, 4), rng.integers(0, 2, 4), garbler_kw=kw, evaluator_kw=kw)
    assert audit.checked == c.num_slots


def test_audit_detects_broken_label():
    audit = FreeXorAudit()
    labels = np.zeros((3, 16), np.uint8)
    delta = np.full(16, 3, np.uint8)
    audit.record(labels, delta)
    active = labels.copy()
    active[1] ^= delta
    audit.check(active)
    active[2, 5] = 1
    with pytest.raises(FreeXorViolation):
        audit.check(active)


def test_seed_determinism(rng):
    c = build_matvec(2, 3, 8)
    g, e = rng.integers(0, 2, 48), rng.integers(0, 2, 24)
    d1 = run_gc(c, g, e, garbler_kw={"seed": 9})[3]
    d2 = run_gc(c, g, e, garbler_kw={"seed": 9})[3]
    d3 = run_gc(c, g, e, garbler_kw={"seed": 10})[3]
    assert d1 == d2 != d3


@pytest.mark.parametrize("flush_bytes", [1000, 4096, 64 * 1024])
def test_batched_and_per_gate_transcripts_identical(flush_bytes, rng):
    c = build_matvec(2, 2, 16)
    g, e = rng.integers(0, 2, 64), rng.integers(0, 2, 32)
    runs = [
        run_gc(c, g, e, garbler_kw={"seed": 3, "gate_api": api, "flush_bytes": flush_bytes},
               evaluator_kw={"gate_api": api})
        for api in ("batched", "per-gate")
    ]
    (o1, s1, _, d1), (o2, s2, _, d2) = runs
    assert o1.tolist() == o2.tolist()
    assert d1 == d2
    assert s1 == s2
    assert s1.flushes == math.ceil(s1.bytes_sent / flush_bytes)


def test_and_many_matches_scalar_calls(rng):
    n = 1000
    a0 = rng.integers(0, 256, (n, 16), dtype=np.uint8)
    b0 = rng.integers(0, 256, (n, 16), dtype=np.uint8)
    digests, outs = [], []
    for batch in (n, 1):
        ch, peer = pair_in_memory(record=True)
        gb = Garbler(ch, seed=4)
        res = [gb.and_many(a0[i : i + batch], b0[i : i + batch]) for i in range(0, n, batch)]
        gb.finish()
        outs.append(np.concatenate(res))
        digests.append(ch.transcript_digest())
        assert ch.stats().bytes_sent == 32 * n
    assert digests[0] == digests[1]
    assert np.array_equal(outs[0], outs[1])


def test_vectored_api_round_trip(rng):
    """A hand-written program against the label-batch API: y = (a & b) ^ ~c."""
    g_ch, e_ch = pair_in_memory()
    n = 300
    a, b, cbits = (rng.integers(0, 2, n) for _ in range(3))
    result = {}

    def garbler():
        gb = Garbler(g_ch, seed=1)
        la, lb, lc = (gb.fresh_labels(n) for _ in range(3))
        for lab, bits in ((la, a), (lb, b), (lc, cbits)):
            gb.send_active(lab, bits)
        y = gb.xor_many(gb.and_many(la, lb), gb.inv_many(lc))
        gb.reveal(y)
        gb.finish()

    t = threading.Thread(target=garbler)
    t.start()
    ev = Evaluator(e_ch)
    la, lb, lc = (ev.recv_labels(n) for _ in range(3))
    y = ev.xor_many(ev.and_many(la, lb), ev.inv_many(lc))
    result = ev.decode(y)
    t.join()
    assert result.tolist() == ((a & b) ^ (1 - cbits)).tolist()


def test_input_length_mismatch():
    b = CircuitBuilder(1, 1)
    c = b.build([b.and_(0, 1)])
    ch, _ = pair_in_memory()
    with pytest.raises(ValueError):
        Garbler(ch).run(c, [1, 1])


def test_external_mode_requires_delivery():
    b = CircuitBuilder(1, 1)
    c = b.build([b.and_(0, 1)])
    ch, _ = pair_in_memory()
    with pytest.raises(ValueError):
        Evaluator(ch).run(c, [1], input_mode=InputMode.EXTERNAL)


def test_channel_closed_mid_stream():
    c = build_matvec(2, 2, 8)
    g_ch, e_ch = pair_in_memory()
    g_ch.send(bytes(100))
    g_ch.flush()
    g_ch.close()
    with pytest.raises(ChannelClosed):
        run_evaluator(c, np.zeros(16, np.uint8), e_ch, input_mode="external",
                      delivery=TrustedDelivery(timeout=1))


def test_streams_under_small_pipe(rng):
    """The garbler never holds the transcript: a 64 KiB pipe suffices for ~2 MB."""
    c = build_matvec(8, 8, 32)
    m, v = rng.integers(0, 2**32, (8, 8)), rng.integers(0, 2**32, 8)
    g_ch, e_ch = pair_in_memory(capacity=64 * 1024)
    t = threading.Thread(target=run_garbler, args=(c, int_to_bits(m.ravel(), 32), g_ch))
    t.start()
    out = run_evaluator(c, int_to_bits(v, 32), e_ch)
    t.join()
    assert bits_to_int(out, 32).tolist() == matvec_oracle(m, v, 32).tolist()
    assert g_ch.stats().bytes_sent > 30 * 64 * 1024


def test_gate_index_advances_identically(rng):
    c = random_circuit(rng, 100)
    g_ch, e_ch = pair_in_memory()
    gb, ev = Garbler(g_ch, seed=2), Evaluator(e_ch)
    t = threading.Thread(target=gb.run, args=(c, rng.integers(0, 2, 4)))
    t.start()
    ev.run(c, rng.integers(0, 2, 4))
    t.join()
    assert gb.gate_index == ev.gate_index == c.stats().and_count


def test_gate_api_enum_values():
    assert GateApi("per-gate") is GateApi.PER_GATE
    assert InputMode("direct") is InputMode.DIRECT
    assert blocks_from_ints([1]).shape == (1, 16)
