"""Duplex, flush-delimited byte channels with traffic counters.

The stream is raw: the transport adds no framing, protocols know their own
message sizes.  A *message* is whatever one flush hands to the backend (or one
send, for eager channels).  Backends: in-memory, optionally shaped by a
:class:`NetworkProfile` using real delays, and TCP sockets with Nagle disabled.
Flushes hand over one contiguous buffer, which is also what a kernel-bypass
backend would need.
"""
from __future__ import annotations

import hashlib
import math
import socket
import threading
import time
from collections import deque
from dataclasses import dataclass, fields

DEFAULT_PIPE_CAPACITY = 16 << 20


class ChannelClosed(ConnectionError):
    """The channel, or its peer, is closed."""


@dataclass(frozen=True)
class NetworkProfile:
    """Link model: round-trip time (s), bandwidth (bit/s), per-message cost (s)."""

    rtt: float = 0.0
    bandwidth: float = math.inf
    per_message_overhead: float = 0.0

    def __post_init__(self):
        if not self.rtt >= 0:
            raise ValueError(f"rtt must be >= 0, got {self.rtt}")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not self.per_message_overhead >= 0:
            raise ValueError("per_message_overhead must be >= 0")

    def transfer_time(self, nbytes: int) -> float:
        return nbytes * 8 / self.bandwidth

    def one_way(self, nbytes: int) -> float:
        return self.rtt / 2 + self.transfer_time(nbytes) + self.per_message_overhead


# Kernel TCP over a 10 Gbit/s NIC, ping RTT ~800 us.
X710 = NetworkProfile(rtt=800e-6, bandwidth=10e9)
# RDMA over a 200 Gbit/s NIC, ~1 us one-way.
CX7 = NetworkProfile(rtt=2e-6, bandwidth=200e9)
WAN = NetworkProfile(rtt=40e-3, bandwidth=1e9)

PROFILES = {"x710": X710, "cx7": CX7, "wan": WAN}


@dataclass
class ChannelStats:
    bytes_sent: int = 0
    bytes_received: int = 0
    messages_sent: int = 0
    flushes: int = 0

    def __sub__(self, other: "ChannelStats") -> "ChannelStats":
        return ChannelStats(*(getattr(self, f.name) - getattr(other, f.name) for f in fields(self)))

    def copy(self) -> "ChannelStats":
        return ChannelStats(*(getattr(self, f.name) for f in fields(self)))


class Channel:
    """One endpoint.  ``send`` buffers, ``flush`` hands the buffer to the peer
    as one message; with ``eager=True`` every send is its own message and
    ``flush`` only marks a round boundary."""

    profile: NetworkProfile | None = None

    def __init__(self, *, eager: bool = False, record: bool = False):
        self.eager = eager
        self._buf = bytearray()
        self._stats = ChannelStats()
        self._closed = False
        self._unflushed_eager = False
        self._digest = hashlib.sha256() if record else None

    # backend hooks
    def _transmit(self, payload) -> None:
        raise NotImplementedError

    def _receive(self, n: int) -> bytearray:
        raise NotImplementedError

    def _shutdown(self) -> None:
        pass

    def _check_open(self) -> None:
        if self._closed:
            raise ChannelClosed("channel is closed")

    def _hand_off(self, payload) -> None:
        self._transmit(payload)
        if self._digest is not None:
            self._digest.update(payload)
        self._stats.bytes_sent += len(payload)
        self._stats.messages_sent += 1

    def send(self, data) -> None:
        self._check_open()
        view = memoryview(data).cast("B")
        if not len(view):
            return
        if self.eager:
            self._hand_off(bytes(view))
            self._unflushed_eager = True
        else:
            self._buf += view

    def flush(self) -> None:
        self._check_open()
        if self._buf:
            payload, self._buf = self._buf, bytearray()
            self._hand_off(payload)
            self._stats.flushes += 1
        elif self._unflushed_eager:
            self._stats.flushes += 1
        self._unflushed_eager = False

    def recv(self, n: int) -> bytearray:
        """Block until exactly ``n`` bytes arrive."""
        if n < 0:
            raise ValueError("n must be >= 0")
        self._check_open()
        if n == 0:
            return bytearray()
        data = self._receive(n)
        self._stats.bytes_received += n
        return data

    def stats(self) -> ChannelStats:
        return self._stats.copy()

    def transcript_digest(self) -> str:
        """SHA-256 of every byte this endpoint has sent (``record=True`` only)."""
        if self._digest is None:
            raise RuntimeError("channel was created without record=True")
        return self._digest.hexdigest()

    @property
    def closed(self) -> bool:
        return self._closed

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class _Pipe:
    """One direction of an in-memory link."""

    def __init__(self, profile: NetworkProfile | None, capacity: int):
        self.profile = profile
        self.capacity = capacity
        self.cond = threading.Condition()
        self.queue: deque = deque()  # [deliver_at, memoryview, offset]
        self.pending = 0
        self.link_free_at = 0.0
        self.writer_closed = False
        self.reader_closed = False

    def put(self, payload) -> None:
        size = len(payload)
        with self.cond:
            while self.pending and self.pending + size > self.capacity:
                if self.reader_closed:
                    break
                self.cond.wait()
            if self.reader_closed:
                raise ChannelClosed("peer closed the channel")
            deliver_at = 0.0
            if self.profile is not None:
                now = time.monotonic()
                start = max(now, self.link_free_at)
                self.link_free_at = start + self.profile.transfer_time(size)
                deliver_at = (
                    self.link_free_at + self.profile.rtt / 2 + self.profile.per_message_overhead
                )
            self.queue.append([deliver_at, memoryview(payload), 0])
            self.pending += size
            self.cond.notify_all()

    def get(self, n: int) -> bytearray:
        out = bytearray(n)
        got = 0
        with self.cond:
            while got < n:
                if not self.queue:
                    if self.writer_closed or self.reader_closed:
                        raise ChannelClosed(f"channel closed with {n - got} of {n} bytes missing")
                    self.cond.wait()
                    continue
                head = self.queue[0]
                wait = head[0] - time.monotonic() if head[0] else 0.0
                if wait > 0:
                    self.cond.wait(wait)
                    continue
                view, off = head[1], head[2]
                take = min(n - got, len(view) - off)
                out[got : got + take] = view[off : off + take]
                got += take
                if off + take == len(view):
                    self.queue.popleft()
                else:
                    head[2] = off + take
                self.pending -= take
                self.cond.notify_all()
        return out

    def close_writer(self) -> None:
        with self.cond:
            self.writer_closed = True
            self.cond.notify_all()

    def close_reader(self) -> None:
        with self.cond:
            self.reader_closed = True
            self.queue.clear()
            self.pending = 0
            self.cond.notify_all()


class MemoryChannel(Channel):
    def __init__(self, outgoing: _Pipe, incoming: _Pipe, **kw):
        super().__init__(**kw)
        self._out = outgoing
        self._in = incoming
        self.profile = outgoing.profile

    def _transmit(self, payload) -> None:
        self._out.put(payload)

    def _receive(self, n: int) -> bytearray:
        return self._in.get(n)

    def _shutdown(self) -> None:
        self._out.close_writer()
        self._in.close_reader()


def pair_in_memory(
    profile: NetworkProfile | None = None,
    *,
    eager: bool = False,
    record: bool = False,
    capacity: int = DEFAULT_PIPE_CAPACITY,
) -> tuple[MemoryChannel, MemoryChannel]:
    """Two connected endpoints.  With a profile, a flushed batch of B bytes is
    readable no earlier than ``rtt/2 + B/bandwidth + per_message_overhead``
    after the flush, and batches queue behind each other on the link.

    ``capacity`` bounds unread bytes per direction; a sender blocks past it.
    """
    ab, ba = _Pipe(profile, capacity), _Pipe(profile, capacity)
    return (
        MemoryChannel(ab, ba, eager=eager, record=record),
        MemoryChannel(ba, ab, eager=eager, record=record),
    )


def parse_address(address: str) -> tuple[str, int]:
    host, sep, port = address.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must be host:port, got {address!r}")
    return host or "127.0.0.1", int(port)


class SocketChannel(Channel):
    def __init__(self, sock: socket.socket, **kw):
        super().__init__(**kw)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self.sock = sock

    def _transmit(self, payload) -> None:
        try:
            self.sock.sendall(payload)
        except OSError as exc:
            raise ChannelClosed(f"send failed: {exc}") from exc

    def _receive(self, n: int) -> bytearray:
        buf = bytearray(n)
        view = memoryview(buf)
        got = 0
        while got < n:
            try:
                k = self.sock.recv_into(view[got:])
            except OSError as exc:
                raise ChannelClosed(f"recv failed: {exc}") from exc
            if k == 0:
                raise ChannelClosed(f"peer closed with {n - got} of {n} bytes missing")
            got += k
        return buf

    def _shutdown(self) -> None:
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


class SocketListener:
    """Bound listening socket; port 0 picks a free port (see ``address``)."""

    def __init__(self, address: str):
        host, port = parse_address(address)
        self._sock = socket.create_server((host, port))
        self.address = "%s:%d" % self._sock.getsockname()[:2]

    def accept(self, timeout: float | None = None, **kw) -> SocketChannel:
        self._sock.settimeout(timeout)
        try:
            conn, _ = self._sock.accept()
        finally:
            self._sock.close()
        conn.settimeout(None)
        return SocketChannel(conn, **kw)


def listen_socket(address: str, timeout: float | None = None, **kw) -> SocketChannel:
    return SocketListener(address).accept(timeout, **kw)


def connect_socket(address: str, timeout: float = 10.0, **kw) -> SocketChannel:
    """Connect, retrying refused connections until ``timeout`` so the two
    parties can be started in any order."""
    host, port = parse_address(address)
    deadline = time.monotonic() + timeout
    while True:
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
            break
        except ConnectionRefusedError:
            if time.monotonic() >= deadline:
                raise
            time.sleep(0.05)
    sock.settimeout(None)
    return SocketChannel(sock, **kw)


def pair_socket(**kw) -> tuple[SocketChannel, SocketChannel]:
    """Loopback TCP pair inside one process."""
    listener = SocketListener("127.0.0.1:0")
    a = connect_socket(listener.address, **kw)
    b = listener.accept(**kw)
    return a, b
