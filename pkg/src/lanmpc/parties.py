"""Run two party functions concurrently, one thread each, with timing."""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Any, Callable

from lanmpc.transport import Channel


@dataclass
class PartyResult:
    value: Any
    wall: float
    cpu: float


def run_parties(
    fn0: Callable[[Channel], Any],
    fn1: Callable[[Channel], Any],
    ch0: Channel,
    ch1: Channel,
    *,
    timeout: float | None = None,
) -> tuple[PartyResult, PartyResult, float]:
    """Call ``fn0(ch0)`` and ``fn1(ch1)`` on two threads released together.

    Returns both results and the wall-clock span from release until the last
    party finished.  CPU time is per thread.  If either side raises, both
    channels are closed so the other side unblocks, and the first error is
    re-raised.
    """
    barrier = threading.Barrier(2)
    results: list[PartyResult | None] = [None, None]
    errors: list[BaseException] = []
    marks = [0.0, 0.0]

    def body(i, fn, ch):
        try:
            barrier.wait()
            t0 = time.perf_counter()
            c0 = time.thread_time()
            if i == 0:
                marks[0] = t0
            value = fn(ch)
            results[i] = PartyResult(value, time.perf_counter() - t0, time.thread_time() - c0)
            marks[1] = max(marks[1], time.perf_counter())
        except BaseException as exc:  # noqa: BLE001 - surfaced to the caller
            errors.append(exc)
            ch0.close()
            ch1.close()

    threads = [
        threading.Thread(target=body, args=(0, fn0, ch0), name="party-0", daemon=True),
        threading.Thread(target=body, args=(1, fn1, ch1), name="party-1", daemon=True),
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout)
        if t.is_alive():
            ch0.close()
            ch1.close()
            raise TimeoutError(f"{t.name} did not finish within {timeout} s")
    if errors:
        raise errors[0]
    return results[0], results[1], marks[1] - marks[0]
