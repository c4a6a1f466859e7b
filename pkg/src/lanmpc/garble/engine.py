"""Semi-honest garbler and evaluator over a :class:`~lanmpc.transport.Channel`.

Transcript, garbler to evaluator, little-endian throughout::

    [garbler input labels, 16 B each]
    [evaluator input labels, 16 B each]      DIRECT mode only
    [AND tables, 32 B each, in gate order]
    [output decode bits, packed LSB-first]

In DIRECT mode the evaluator first sends its input bits, packed LSB-first.
That mode hands the garbler the evaluator's input in the clear; it exists to
benchmark circuit execution and is not secure.  EXTERNAL mode takes the
evaluator's labels from a caller-supplied :class:`LabelDelivery` (the slot an
oblivious-transfer component would fill) and the traffic is one-way.

The garbler flushes at every ``flush_bytes`` boundary of its output stream and
once at the end, so flush counts depend only on transcript length.
"""
from __future__ import annotations

import enum
import threading
from typing import Protocol

import numpy as np

from lanmpc.garble import halfgates
from lanmpc.garble._backend import kernels
from lanmpc.garble.hashing import blocks_from_ints, ints_from_blocks
from lanmpc.prg import Prg
from lanmpc.transport import Channel

FLUSH_BYTES = 64 * 1024
LABEL_BYTES = 16
TABLE_BYTES = 32
_PIECE = 1 << 16

XOR, AND, INV = 0, 1, 2


class InputMode(str, enum.Enum):
    DIRECT = "direct"
    EXTERNAL = "external"


class GateApi(str, enum.Enum):
    BATCHED = "batched"
    PER_GATE = "per-gate"


class LabelDelivery(Protocol):
    """Delivers the evaluator's active input labels without the channel."""

    def offer(self, false_labels: np.ndarray, delta: np.ndarray) -> None: ...

    def receive(self, bits: np.ndarray) -> np.ndarray: ...


class TrustedDelivery:
    """In-process stand-in for an oblivious-transfer functionality.

    Both parties must share the object; it computes the active labels itself.
    Fine for tests and benchmarks, meaningless as a security mechanism.
    """

    def __init__(self, timeout: float | None = 60.0):
        self._ready = threading.Event()
        self._timeout = timeout
        self._labels = None
        self._delta = None

    def offer(self, false_labels, delta) -> None:
        self._labels = np.array(false_labels, dtype=np.uint8).reshape(-1, 16)
        self._delta = np.array(delta, dtype=np.uint8).reshape(16)
        self._ready.set()

    def receive(self, bits) -> np.ndarray:
        if not self._ready.wait(self._timeout):
            raise TimeoutError("garbler never offered input labels")
        bits = np.asarray(bits, dtype=bool).reshape(-1)
        return self._labels ^ np.where(bits[:, None], self._delta, np.uint8(0))


class FreeXorViolation(AssertionError):
    pass


class FreeXorAudit:
    """Debug hook: the garbler deposits its false labels after the run and the
    evaluator checks every active label is ``F`` or ``F ^ delta``."""

    def __init__(self):
        self._ready = threading.Event()
        self.false_labels = None
        self.delta = None
        self.checked = 0

    def record(self, labels: np.ndarray, delta: np.ndarray) -> None:
        self.false_labels = labels.copy()
        self.delta = delta.copy()
        self._ready.set()

    def check(self, active: np.ndarray, timeout: float = 60.0) -> None:
        if not self._ready.wait(timeout):
            raise TimeoutError("garbler never recorded its labels")
        diff = active ^ self.false_labels
        ok = (diff == 0).all(axis=1) | (diff == self.delta).all(axis=1)
        if not ok.all():
            raise FreeXorViolation(f"{int((~ok).sum())} slots hold labels outside {{F, F^delta}}")
        self.checked = len(active)


class _Outbox:
    """Writes a stream to the channel, flushing at each ``flush_bytes`` boundary."""

    def __init__(self, channel: Channel, flush_bytes: int):
        if flush_bytes <= 0:
            raise ValueError("flush_bytes must be positive")
        self.channel = channel
        self.flush_bytes = flush_bytes
        self.pending = 0

    def write(self, data) -> None:
        view = memoryview(data).cast("B")
        while len(view):
            take = min(len(view), self.flush_bytes - self.pending)
            self.channel.send(view[:take])
            self.pending += take
            view = view[take:]
            if self.pending == self.flush_bytes:
                self.channel.flush()
                self.pending = 0

    def finish(self) -> None:
        self.channel.flush()
        self.pending = 0


def _bits(values, n: int, who: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.uint8).reshape(-1)
    if len(arr) != n:
        raise ValueError(f"{who} input has {len(arr)} bits, circuit expects {n}")
    return arr


def _lsb(labels: np.ndarray) -> np.ndarray:
    return labels[:, 0] & 1


def _pack(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def _unpack(data, n: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8), bitorder="little")[:n]


def _and_count(chunk) -> int:
    return int(np.count_nonzero(chunk.kind == AND))


# -- per-gate dispatch path --------------------------------------------------
#
# One object per gate, one virtual call per gate, scalar hashing per AND: the
# deliberately naive execution model the batched kernels are compared against.


class _GateOp:
    __slots__ = ("a", "b", "out")

    def __init__(self, a: int, b: int, out: int):
        self.a, self.b, self.out = a, b, out

    def garble(self, party: "Garbler", labels: list) -> None:
        raise NotImplementedError

    def evaluate(self, party: "Evaluator", labels: list) -> None:
        raise NotImplementedError


class _XorOp(_GateOp):
    __slots__ = ()

    def garble(self, party, labels):
        labels[self.out] = halfgates.garble_xor(labels[self.a], labels[self.b])

    def evaluate(self, party, labels):
        labels[self.out] = halfgates.eval_xor(labels[self.a], labels[self.b])


class _AndOp(_GateOp):
    __slots__ = ()

    def garble(self, party, labels):
        table, c0 = halfgates.garble_and(
            labels[self.a], labels[self.b], party.delta_int, party.gate_index
        )
        party.gate_index += 1
        party._out.write(table.to_bytes())
        labels[self.out] = c0

    def evaluate(self, party, labels):
        table = halfgates.GarbledAndTable.from_bytes(party.channel.recv(TABLE_BYTES))
        labels[self.out] = halfgates.eval_and(
            labels[self.a], labels[self.b], table, party.gate_index
        )
        party.gate_index += 1


class _InvOp(_GateOp):
    __slots__ = ()

    def garble(self, party, labels):
        labels[self.out] = labels[self.a] ^ party.delta_int

    def evaluate(self, party, labels):
        labels[self.out] = labels[self.a]


_OPS = {XOR: _XorOp, AND: _AndOp, INV: _InvOp}


def _gate_objects(chunk) -> list[_GateOp]:
    return [
        _OPS[k](a, b, o)
        for k, a, b, o in zip(
            chunk.kind.tolist(), chunk.in0.tolist(), chunk.in1.tolist(), chunk.out.tolist()
        )
    ]


class _Party:
    def __init__(self, channel: Channel, gate_api: GateApi | str, chunk_gates: int):
        self.channel = channel
        self.gate_api = GateApi(gate_api)
        self.chunk_gates = chunk_gates
        self.gate_index = 0
        self.labels: np.ndarray | None = None

    def _run_chunks(self, circuit, labels: np.ndarray) -> None:
        if self.gate_api is GateApi.PER_GATE:
            store = ints_from_blocks(labels)
            for chunk in circuit.execution_chunks(self.chunk_gates):
                for op in _gate_objects(chunk):
                    self._dispatch(op, store)
            labels[:] = blocks_from_ints(store)
        else:
            for chunk in circuit.execution_chunks(self.chunk_gates):
                self._batched_chunk(chunk, labels)


class Garbler(_Party):
    """Garbling side.  Besides :meth:`run` for whole circuits it offers a
    vectored API (``xor_many``/``inv_many``/``and_many``) over ``(n, 16)``
    label arrays for programs written directly against label batches."""

    def __init__(
        self,
        channel: Channel,
        *,
        seed=None,
        flush_bytes: int = FLUSH_BYTES,
        gate_api: GateApi | str = GateApi.BATCHED,
        chunk_gates: int = 1 << 16,
    ):
        super().__init__(channel, gate_api, chunk_gates)
        self._prg = Prg(seed, domain="garbler")
        delta = self._prg.blocks(1)[0]
        delta[0] |= 1
        self.delta = delta
        self.delta_int = int.from_bytes(delta.tobytes(), "little")
        self._out = _Outbox(channel, flush_bytes)

    # vectored API
    def fresh_labels(self, n: int) -> np.ndarray:
        return self._prg.blocks(n)

    def send_active(self, false_labels: np.ndarray, bits) -> None:
        bits = np.asarray(bits, dtype=bool).reshape(-1)
        self._out.write(false_labels ^ np.where(bits[:, None], self.delta, np.uint8(0)))

    def xor_many(self, a0: np.ndarray, b0: np.ndarray) -> np.ndarray:
        return a0 ^ b0

    def inv_many(self, a0: np.ndarray) -> np.ndarray:
        return a0 ^ self.delta

    def and_many(self, a0: np.ndarray, b0: np.ndarray) -> np.ndarray:
        """Garble independent AND gates; their tables go out as one buffer."""
        tables, c0 = kernels.garble_and_batch(a0, b0, self.delta, self.gate_index)
        self.gate_index += len(c0)
        self._out.write(tables)
        return c0

    def reveal(self, false_labels: np.ndarray) -> None:
        """Send one decode bit per label so the evaluator can read the outputs."""
        self._out.write(_pack(_lsb(false_labels)))

    def finish(self) -> None:
        self._out.finish()

    # circuit execution
    def _dispatch(self, op: _GateOp, store: list) -> None:
        op.garble(self, store)

    def _batched_chunk(self, chunk, labels: np.ndarray) -> None:
        tables = np.empty(TABLE_BYTES * _and_count(chunk), dtype=np.uint8)
        n = kernels.garble_gates(
            chunk.kind, chunk.in0, chunk.in1, chunk.out, labels, self.delta, self.gate_index, tables
        )
        self.gate_index += n
        self._out.write(tables)

    def _send_input_labels(self, labels, slots, bits) -> None:
        for lo in range(0, len(slots), _PIECE):
            idx = slots[lo : lo + _PIECE]
            fresh = self.fresh_labels(len(idx))
            labels[idx] = fresh
            if bits is not None:
                self.send_active(fresh, bits[lo : lo + _PIECE])

    def run(
        self,
        circuit,
        inputs,
        *,
        input_mode: InputMode | str = InputMode.DIRECT,
        delivery: LabelDelivery | None = None,
        audit: FreeXorAudit | None = None,
    ) -> None:
        mode = InputMode(input_mode)
        if mode is InputMode.EXTERNAL and delivery is None:
            raise ValueError("EXTERNAL input mode needs a LabelDelivery")
        g_slots = circuit.garbler_input_slots
        e_slots = circuit.evaluator_input_slots
        bits = _bits(inputs, len(g_slots), "garbler")
        labels = np.zeros((circuit.num_slots, LABEL_BYTES), dtype=np.uint8)

        ebits = None
        if mode is InputMode.DIRECT:
            ebits = _unpack(self.channel.recv((len(e_slots) + 7) // 8), len(e_slots))
        self._send_input_labels(labels, g_slots, bits)
        self._send_input_labels(labels, e_slots, ebits)
        if mode is InputMode.EXTERNAL:
            delivery.offer(labels[e_slots], self.delta)

        self._run_chunks(circuit, labels)
        self.reveal(labels[circuit.output_slots])
        self.finish()
        self.labels = labels
        if audit is not None:
            audit.record(labels, self.delta)


class Evaluator(_Party):
    def __init__(
        self,
        channel: Channel,
        *,
        gate_api: GateApi | str = GateApi.BATCHED,
        chunk_gates: int = 1 << 16,
    ):
        super().__init__(channel, gate_api, chunk_gates)

    # vectored API
    def recv_labels(self, n: int) -> np.ndarray:
        raw = self.channel.recv(LABEL_BYTES * n)
        return np.frombuffer(raw, dtype=np.uint8).reshape(n, LABEL_BYTES)

    def xor_many(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a ^ b

    def inv_many(self, a: np.ndarray) -> np.ndarray:
        return a.copy()

    def and_many(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        n = len(a)
        tables = self.channel.recv(TABLE_BYTES * n)
        c = kernels.eval_and_batch(a, b, np.frombuffer(tables, dtype=np.uint8), self.gate_index)
        self.gate_index += n
        return c

    def decode(self, active: np.ndarray) -> np.ndarray:
        n = len(active)
        decode = _unpack(self.channel.recv((n + 7) // 8), n)
        return _lsb(active) ^ decode

    # circuit execution
    def _dispatch(self, op: _GateOp, store: list) -> None:
        op.evaluate(self, store)

    def _batched_chunk(self, chunk, labels: np.ndarray) -> None:
        n_and = _and_count(chunk)
        tables = np.frombuffer(self.channel.recv(TABLE_BYTES * n_and), dtype=np.uint8)
        kernels.eval_gates(
            chunk.kind, chunk.in0, chunk.in1, chunk.out, labels, self.gate_index, tables
        )
        self.gate_index += n_and

    def _recv_input_labels(self, labels, slots) -> None:
        for lo in range(0, len(slots), _PIECE):
            idx = slots[lo : lo + _PIECE]
            labels[idx] = self.recv_labels(len(idx))

    def run(
        self,
        circuit,
        inputs,
        *,
        input_mode: InputMode | str = InputMode.DIRECT,
        delivery: LabelDelivery | None = None,
        audit: FreeXorAudit | None = None,
    ) -> np.ndarray:
        mode = InputMode(input_mode)
        if mode is InputMode.EXTERNAL and delivery is None:
            raise ValueError("EXTERNAL input mode needs a LabelDelivery")
        g_slots = circuit.garbler_input_slots
        e_slots = circuit.evaluator_input_slots
        bits = _bits(inputs, len(e_slots), "evaluator")
        labels = np.zeros((circuit.num_slots, LABEL_BYTES), dtype=np.uint8)

        if mode is InputMode.DIRECT:
            self.channel.send(_pack(bits))
            self.channel.flush()
        self._recv_input_labels(labels, g_slots)
        if mode is InputMode.DIRECT:
            self._recv_input_labels(labels, e_slots)
        else:
            labels[e_slots] = delivery.receive(bits)

        self._run_chunks(circuit, labels)
        out = self.decode(labels[circuit.output_slots])
        self.labels = labels
        if audit is not None:
            audit.check(labels)
        return out


def run_garbler(circuit, inputs, channel: Channel, **kw) -> None:
    party_kw = {k: kw.pop(k) for k in ("seed", "flush_bytes", "gate_api", "chunk_gates") if k in kw}
    Garbler(channel, **party_kw).run(circuit, inputs, **kw)


def run_evaluator(
    circuit, inputs, channel: Channel, input_mode: InputMode | str = InputMode.DIRECT, **kw
) -> np.ndarray:
    party_kw = {k: kw.pop(k) for k in ("gate_api", "chunk_gates") if k in kw}
    return Evaluator(channel, **party_kw).run(circuit, inputs, input_mode=input_mode, **kw)


def transcript_bytes(circuit, input_mode: InputMode | str = InputMode.DIRECT) -> dict:
    """Closed-form byte counts per direction for one run on ``circuit``."""
    mode = InputMode(input_mode)
    ng = len(circuit.garbler_inputs)
    ne = len(circuit.evaluator_inputs)
    forward = (
        LABEL_BYTES * ng
        + (LABEL_BYTES * ne if mode is InputMode.DIRECT else 0)
        + TABLE_BYTES * circuit.stats().and_count
        + (len(circuit.outputs) + 7) // 8
    )
    backward = (ne + 7) // 8 if mode is InputMode.DIRECT else 0
    return {"forward": forward, "backward": backward}
