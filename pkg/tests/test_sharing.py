import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lanmpc import sharing
from lanmpc.sharing import (
    BeaverTriple,
    FlushPolicy,
    Share,
    SharingError,
    TripleExhausted,
    add_const,
    add_local,
    dealer_generate,
    matvec_ss,
    mul_beaver,
    mul_const,
    reconstruct,
    ring_matvec,
    share,
)
from lanmpc.transport import pair_in_memory

U64 = st.integers(0, 2**64 - 1)
M = 2**64


def two_party(fn0, fn1, profile=None):
    """Run party functions on two threads; return results and both channels."""
    c0, c1 = pair_in_memory(profile)
    out = [None, None]
    errs = []

    def wrap(i, fn, ch):
        try:
            out[i] = fn(ch)
        except BaseException as exc:  # noqa: BLE001
            errs.append(exc)
            c0.close()
            c1.close()

    t = threading.Thread(target=wrap, args=(1, fn1, c1))
    t.start()
    wrap(0, fn0, c0)
    t.join()
    if errs:
        raise errs[0]
    return out, c0, c1


def test_share_zero_and_wrap_boundary():
    assert reconstruct(*share(0, 1)) == 0
    assert reconstruct(*share(M - 1, 2)) == M - 1


def test_different_seeds_differ():
    a, b = share(42, 1), share(42, 2)
    assert int(a[0].value) != int(b[0].value)
    assert reconstruct(*a) == reconstruct(*b) == 42


def test_reconstruct_examples():
    assert reconstruct(Share(0, 3), Share(1, 4)) == 7
    assert reconstruct(Share(0, 2**63), Share(1, 2**63)) == 0
    with pytest.raises(SharingError):
        reconstruct(Share(0, 1), Share(0, 2))
    with pytest.raises(SharingError):
        Share(2, 0)


def test_local_ops():
    x0, x1 = share(5, 1)
    y0, y1 = share(6, 2)
    assert reconstruct(add_local(x0, y0), add_local(x1, y1)) == 11
    assert reconstruct(mul_const(x0, 3), mul_const(x1, 3)) == 15
    assert reconstruct(add_const(x0, 10), add_const(x1, 10)) == 15
    with pytest.raises(SharingError):
        add_local(x0, y1)


@settings(max_examples=200, deadline=None)
@given(U64, U64, st.integers(0, 2**32))
def test_ring_homomorphism(x, y, seed):
    x0, x1 = share(x, seed)
    y0, y1 = share(y, seed + 1)
    assert reconstruct(add_local(x0, y0), add_local(x1, y1)) == (x + y) % M


def test_additions_cost_nothing():
    c0, _ = pair_in_memory()
    s = Share(0, np.arange(10**6, dtype=np.uint64))
    t = add_local(s, s)
    t = add_const(t, 7)
    assert len(t) == 10**6
    assert c0.stats() == type(c0.stats())()


def test_dealer_triples_valid_and_deterministic():
    s0, s1 = dealer_generate(1000, seed=7)
    a = s0.arrays()[0] + s1.arrays()[0]
    b = s0.arrays()[1] + s1.arrays()[1]
    c = s0.arrays()[2] + s1.arrays()[2]
    assert np.array_equal(a * b, c)
    again = dealer_generate(1000, seed=7)[0]
    assert all(np.array_equal(x, y) for x, y in zip(s0.arrays(), again.arrays()))
    e0, e1 = dealer_generate(0, seed=1)
    assert len(e0) == len(e1) == 0


def test_triple_exhaustion_and_order():
    s0, _ = dealer_generate(3, seed=1)
    first = s0.take(2)
    assert s0.remaining == 1
    assert int(s0.take(1).a.value[0]) == int(s0.arrays()[0][2])
    assert len(first) == 2
    with pytest.raises(TripleExhausted):
        s0.take(1)


def test_beaver_worked_example():
    # x=5, y=6, a=3, b=4, c=12 -> d = e = 2, product 30
    x, y = share(5, 1), share(6, 2)
    a, b, c = share(3, 3), share(4, 4), share(12, 5)
    trip = [BeaverTriple(a[i], b[i], c[i]) for i in range(2)]

    def party(i):
        return lambda ch: mul_beaver(x[i], y[i], trip[i], ch)

    (z0, z1), c0, c1 = two_party(party(0), party(1))
    assert reconstruct(z0, z1) == 30
    assert c0.stats().bytes_sent == c1.stats().bytes_sent == 16


@pytest.mark.parametrize("policy", ["batched", "eager"])
def test_beaver_batch_against_oracle(policy, rng):
    n = 500
    x = rng.integers(0, 2**64, n, dtype=np.uint64)
    y = rng.integers(0, 2**64, n, dtype=np.uint64)
    xs, ys = share(x, 1), share(y, 2)
    stores = dealer_generate(n, seed=3)

    def party(i):
        return lambda ch: mul_beaver(xs[i], ys[i], stores[i], ch, policy)

    (z0, z1), c0, c1 = two_party(party(0), party(1))
    assert np.array_equal(reconstruct(z0, z1), x * y)
    for ch in (c0, c1):
        assert ch.stats().bytes_sent == 16 * n
        assert ch.stats().flushes == (1 if policy == "batched" else n)


def test_open_values_and_costs():
    x = share(np.array([42, 7, 2**64 - 1], dtype=np.uint64), 1)
    (o0, o1), c0, c1 = two_party(lambda ch: sharing.open(x[0], ch), lambda ch: sharing.open(x[1], ch))
    assert o0.tolist() == o1.tolist() == [42, 7, 2**64 - 1]
    assert c0.stats().bytes_sent == 24 and c0.stats().flushes == 1
    e = Share(0, np.zeros(0, np.uint64))
    c, _ = pair_in_memory()
    assert sharing.open(e, c).size == 0
    assert c.stats().bytes_sent == 0


def test_matvec_identity():
    m, v = share(np.eye(2, dtype=np.uint64), 1), share(np.array([9, 4], np.uint64), 2)
    stores = dealer_generate(4, seed=1)

    def party(i):
        return lambda ch: sharing.open(matvec_ss(m[i], v[i], stores[i], ch), ch)

    (o0, _), _, _ = two_party(party(0), party(1))
    assert o0.tolist() == [9, 4]


@pytest.mark.parametrize("policy,mult_flushes", [("batched", lambda n: 1), ("eager", lambda n: n)])
def test_matvec_flush_law(policy, mult_flushes, rng):
    rows, cols = 5, 7
    mat = rng.integers(0, 2**64, (rows, cols), dtype=np.uint64)
    vec = rng.integers(0, 2**64, cols, dtype=np.uint64)
    ms, vs = share(mat, 1), share(vec, 2)
    stores = dealer_generate(rows * cols, seed=9)

    def party(i):
        return lambda ch: matvec_ss(ms[i], vs[i], stores[i], ch, policy)

    (y0, y1), c0, c1 = two_party(party(0), party(1))
    assert np.array_equal(reconstruct(y0, y1), ring_matvec(mat, vec))
    for ch, store in ((c0, stores[0]), (c1, stores[1])):
        assert ch.stats().flushes == mult_flushes(rows * cols)
        assert ch.stats().bytes_sent == 16 * rows * cols
        assert store.remaining == 0


@pytest.mark.parametrize("depth", [1, 2, 10])
def test_chain_depth_equals_batched_flushes(depth, rng):
    """x^(depth+1) by repeated multiplication: one dependent layer per step."""
    n = 8
    x = rng.integers(0, 2**64, n, dtype=np.uint64)
    xs = share(x, 1)
    stores = dealer_generate(n * depth, seed=2)

    def party(i):
        def run(ch):
            acc = xs[i]
            for _ in range(depth):
                acc = mul_beaver(acc, xs[i], stores[i], ch, FlushPolicy.BATCHED)
            return acc
        return run

    (z0, z1), c0, c1 = two_party(party(0), party(1))
    want = x.copy()
    for _ in range(depth):
        want = want * x
    assert np.array_equal(reconstruct(z0, z1), want)
    assert c0.stats().flushes == c1.stats().flushes == depth


def test_received_openings_look_uniform():
    """Coarse sanity check, not a proof: what party 0 receives is near-uniform."""
    n = 20000
    xs, ys = share(np.full(n, 5, np.uint64), 1), share(np.full(n, 6, np.uint64), 2)
    stores = dealer_generate(n, seed=11)

    def observer(ch):
        ch.send(bytes(16 * n))
        ch.flush()
        return bytes(ch.recv(16 * n))

    (raw, _), _, _ = two_party(observer, lambda ch: mul_beaver(xs[1], ys[1], stores[1], ch))
    counts = np.bincount(np.frombuffer(raw, np.uint8), minlength=256)
    expected = len(raw) / 256
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < 400  # 255 degrees of freedom


def test_operand_checks():
    s0, _ = dealer_generate(2, seed=1)
    c, _ = pair_in_memory()
    with pytest.raises(SharingError):
        mul_beaver(Share(0, [1, 2]), Share(0, [1]), s0, c)
    with pytest.raises(SharingError):
        matvec_ss(Share(0, [1, 2]), Share(0, [1, 2]), s0, c)
    with pytest.raises(TripleExhausted):
        mul_beaver(Share(0, [1, 2, 3]), Share(0, [1, 2, 3]), s0, c)
