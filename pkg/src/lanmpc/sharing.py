"""Two-party additive secret sharing over Z/2^64 with dealer-made Beaver triples.

Share values are ``uint64`` numpy arrays of any shape (0-d for a single ring
element) and every operation is elementwise.  Openings follow a fixed order so
that each exchange is one dependent round trip: party 0 sends and flushes,
then reads; party 1 reads, then sends and flushes.  An opening message is
``d`` values followed by ``e`` values, little-endian, no framing.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from lanmpc.prg import Prg
from lanmpc.transport import Channel

RING_BITS = 64
ELEM_BYTES = 8
_U64 = np.dtype("<u8")


class SharingError(ValueError):
    pass


class TripleExhausted(SharingError):
    pass


class FlushPolicy(str, enum.Enum):
    EAGER = "eager"  # every multiplication is its own exchange
    BATCHED = "batched"  # one exchange per independent layer


def _ring(x) -> np.ndarray:
    if isinstance(x, np.ndarray) and x.dtype == np.uint64:
        return x
    arr = np.asarray(x)
    if arr.dtype.kind in "iu":
        return arr.astype(np.uint64)
    flat = [int(v) % (1 << RING_BITS) for v in arr.reshape(-1).tolist()]
    return np.array(flat, dtype=np.uint64).reshape(arr.shape)


def _check_party(party: int) -> None:
    if party not in (0, 1):
        raise SharingError(f"party id must be 0 or 1, got {party}")


@dataclass(frozen=True)
class Share:
    party: int
    value: np.ndarray

    def __post_init__(self):
        _check_party(self.party)
        object.__setattr__(self, "value", _ring(self.value))

    def __len__(self) -> int:
        return self.value.size

    def __getitem__(self, idx) -> "Share":
        return Share(self.party, self.value[idx])

    def reshape(self, *shape) -> "Share":
        return Share(self.party, self.value.reshape(*shape))


@dataclass(frozen=True)
class BeaverTriple:
    """One party's shares of ``a``, ``b`` and ``c = a*b`` (elementwise)."""

    a: Share
    b: Share
    c: Share

    @property
    def party(self) -> int:
        return self.a.party

    def __len__(self) -> int:
        return self.a.value.size


class TripleStore:
    """One party's triples, consumed strictly in order."""

    def __init__(self, party: int, a, b, c):
        _check_party(party)
        self.party = party
        self._a, self._b, self._c = (_ring(v).reshape(-1) for v in (a, b, c))
        if not (len(self._a) == len(self._b) == len(self._c)):
            raise SharingError("triple component lengths differ")
        self.cursor = 0

    def __len__(self) -> int:
        return len(self._a)

    @property
    def remaining(self) -> int:
        return len(self._a) - self.cursor

    def take(self, n: int) -> BeaverTriple:
        if n < 0:
            raise ValueError("n must be >= 0")
        if n > self.remaining:
            raise TripleExhausted(f"need {n} triples, {self.remaining} left")
        lo, hi = self.cursor, self.cursor + n
        self.cursor = hi
        p = self.party
        return BeaverTriple(Share(p, self._a[lo:hi]), Share(p, self._b[lo:hi]), Share(p, self._c[lo:hi]))

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._a, self._b, self._c


def _rng(rng) -> Prg:
    if isinstance(rng, Prg):
        return rng
    return Prg(rng, domain="share")


def share(x, rng=None) -> tuple[Share, Share]:
    """Split ``x`` into two additive shares; ``rng`` is a :class:`Prg` or a seed."""
    x = _ring(x)
    s0 = _rng(rng).uint64(x.size).reshape(x.shape)
    with np.errstate(over="ignore"):
        s1 = x - s0
    return Share(0, s0), Share(1, s1)


def reconstruct(s0: Share, s1: Share):
    if {s0.party, s1.party} != {0, 1}:
        raise SharingError("reconstruct needs one share from each party")
    with np.errstate(over="ignore"):
        v = s0.value + s1.value
    return int(v) if v.ndim == 0 else v


def _same_party(s: Share, t: Share) -> None:
    if s.party != t.party:
        raise SharingError(f"shares belong to different parties ({s.party}, {t.party})")


def add_local(s: Share, t: Share) -> Share:
    _same_party(s, t)
    with np.errstate(over="ignore"):
        return Share(s.party, s.value + t.value)


def sub_local(s: Share, t: Share) -> Share:
    _same_party(s, t)
    with np.errstate(over="ignore"):
        return Share(s.party, s.value - t.value)


def add_const(s: Share, k) -> Share:
    """Add a public constant; only party 0 adjusts its share."""
    if s.party != 0:
        return s
    with np.errstate(over="ignore"):
        return Share(0, s.value + _ring(k))


def mul_const(s: Share, k) -> Share:
    with np.errstate(over="ignore"):
        return Share(s.party, s.value * _ring(k))


def dealer_generate(n: int, seed=None) -> tuple[TripleStore, TripleStore]:
    """``n`` triples from a trusted dealer, deterministic per seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    prg = Prg(seed, domain="dealer")
    a, b = prg.uint64(n), prg.uint64(n)
    with np.errstate(over="ignore"):
        c = a * b
    a0, b0, c0 = prg.uint64(n), prg.uint64(n), prg.uint64(n)
    with np.errstate(over="ignore"):
        return TripleStore(0, a0, b0, c0), TripleStore(1, a - a0, b - b0, c - c0)


def _exchange(channel: Channel, party: int, payload: np.ndarray) -> np.ndarray:
    """Swap equal-length element arrays with the peer as one round trip."""
    data = np.ascontiguousarray(payload, dtype=_U64)
    n = data.nbytes
    if party == 0:
        channel.send(data)
        channel.flush()
        peer = channel.recv(n)
    else:
        peer = channel.recv(n)
        channel.send(data)
        channel.flush()
    return np.frombuffer(peer, dtype=_U64).astype(np.uint64)


def open(shares: Share, channel: Channel):  # noqa: A001 - protocol name
    """Reveal shared values to both parties in one exchange."""
    if shares.value.size == 0:
        return shares.value.copy()
    peer = _exchange(channel, shares.party, shares.value.reshape(-1))
    with np.errstate(over="ignore"):
        v = (shares.value.reshape(-1) + peer).reshape(shares.value.shape)
    return int(v) if v.ndim == 0 else v


def _beaver_finish(party: int, t: BeaverTriple, d: np.ndarray, e: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = t.c.value + d * t.b.value + e * t.a.value
        if party == 0:
            z = z + d * e
    return z


def mul_beaver(xs: Share, ys: Share, triples, channel: Channel, policy=FlushPolicy.BATCHED) -> Share:
    """Multiply shared values elementwise; all products form one layer.

    ``triples`` is a :class:`TripleStore` (consumed in order) or an explicit
    :class:`BeaverTriple` of matching size.  BATCHED opens the whole layer in
    one exchange; EAGER runs one exchange per product, each waiting for the
    peer's reply before the next starts.
    """
    _same_party(xs, ys)
    if xs.value.shape != ys.value.shape:
        raise SharingError("operand shapes differ")
    shape = xs.value.shape
    x, y = xs.value.reshape(-1), ys.value.reshape(-1)
    n = x.size
    t = triples.take(n) if isinstance(triples, TripleStore) else triples
    if len(t) != n or t.party != xs.party:
        raise SharingError("triple does not match operands")
    party = xs.party
    with np.errstate(over="ignore"):
        own_d = x - t.a.value
        own_e = y - t.b.value
    policy = FlushPolicy(policy)
    if policy is FlushPolicy.BATCHED:
        peer = _exchange(channel, party, np.concatenate([own_d, own_e])) if n else np.empty(0, np.uint64)
        peer_d, peer_e = peer[:n], peer[n:]
    else:
        peer_d = np.empty(n, dtype=np.uint64)
        peer_e = np.empty(n, dtype=np.uint64)
        for i in range(n):
            got = _exchange(channel, party, np.array([own_d[i], own_e[i]], dtype=np.uint64))
            peer_d[i], peer_e[i] = got
    with np.errstate(over="ignore"):
        d = own_d + peer_d
        e = own_e + peer_e
    return Share(party, _beaver_finish(party, t, d, e).reshape(shape))


mul_layer = mul_beaver


def matvec_ss(
    matrix: Share, vector: Share, triples, channel: Channel, policy=FlushPolicy.BATCHED
) -> Share:
    """Shares of ``M @ v mod 2**64``: one layer of ``rows*cols`` products,
    then local row sums."""
    _same_party(matrix, vector)
    m = matrix.value
    if m.ndim != 2 or vector.value.shape != (m.shape[1],):
        raise SharingError(f"shapes {m.shape} and {vector.value.shape} do not form a matvec")
    rows, cols = m.shape
    tiled = Share(vector.party, np.broadcast_to(vector.value, (rows, cols)).copy())
    prods = mul_beaver(matrix, tiled, triples, channel, policy)
    return Share(matrix.party, prods.value.sum(axis=1, dtype=np.uint64))


def ring_matvec(matrix, vector) -> np.ndarray:
    """Plaintext oracle: wrapping 64-bit matrix-vector product."""
    m, v = _ring(matrix), _ring(vector)
    with np.errstate(over="ignore"):
        return (m * v[None, :]).sum(axis=1, dtype=np.uint64)
