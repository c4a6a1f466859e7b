"""Analytic runtime prediction from protocol footprints and network profiles.

``predict = max(cpu, max(fwd, bwd) * 8 / bandwidth) + rounds * (rtt + overhead)``.
Transfer overlaps with computation because garbling streams; round trips do
not, since each one stalls on a dependency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from lanmpc.circuit.core import CircuitStats
from lanmpc.transport import NetworkProfile

LABEL_BYTES = 16
TABLE_BYTES = 32
ELEM_BYTES = 8


@dataclass(frozen=True)
class ProtocolFootprint:
    bytes_forward: int
    bytes_backward: int
    rounds: int
    cpu_seconds_estimate: float = 0.0

    def __post_init__(self):
        for name in ("bytes_forward", "bytes_backward", "rounds", "cpu_seconds_estimate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def with_cpu(self, seconds: float) -> "ProtocolFootprint":
        return ProtocolFootprint(self.bytes_forward, self.bytes_backward, self.rounds, seconds)


def gc_footprint(
    stats: CircuitStats,
    inputs: int,
    outputs: int,
    *,
    evaluator_inputs_direct: int = 0,
    cpu_seconds: float = 0.0,
) -> ProtocolFootprint:
    """Garbled-circuit traffic.  ``inputs`` counts every label the garbler
    sends.  With ``evaluator_inputs_direct = n`` the evaluator first ships its
    ``n`` input bits, which adds a backward message and a round."""
    forward = LABEL_BYTES * inputs + TABLE_BYTES * stats.and_count + (outputs + 7) // 8
    n = evaluator_inputs_direct
    backward = (n + 7) // 8 if n else 0
    return ProtocolFootprint(forward, backward, 2 if n else 1, cpu_seconds)


def ss_footprint(
    mult_count: int, mult_depth: int, opens: int, *, cpu_seconds: float = 0.0
) -> ProtocolFootprint:
    """Beaver-triple traffic: 16 bytes per product and 8 per opened value in
    each direction, one round per multiplication layer plus the final open."""
    if mult_depth > mult_count:
        raise ValueError(f"depth {mult_depth} exceeds multiplication count {mult_count}")
    if min(mult_count, mult_depth, opens) < 0:
        raise ValueError("counts must be >= 0")
    per_dir = 2 * ELEM_BYTES * mult_count + ELEM_BYTES * opens
    return ProtocolFootprint(per_dir, per_dir, mult_depth + 1, cpu_seconds)


@dataclass(frozen=True)
class Prediction:
    compute: float
    transfer: float
    round_term: float

    @property
    def total(self) -> float:
        return max(self.compute, self.transfer) + self.round_term

    @property
    def round_fraction(self) -> float:
        return self.round_term / self.total if self.total else 0.0


def breakdown(fp: ProtocolFootprint, profile: NetworkProfile) -> Prediction:
    heavy = max(fp.bytes_forward, fp.bytes_backward)
    transfer = 0.0 if math.isinf(profile.bandwidth) else heavy * 8 / profile.bandwidth
    rounds = fp.rounds * (profile.rtt + profile.per_message_overhead)
    return Prediction(fp.cpu_seconds_estimate, transfer, rounds)


def predict_runtime(fp: ProtocolFootprint, profile: NetworkProfile) -> float:
    return breakdown(fp, profile).total


def round_fraction(fp: ProtocolFootprint, profile: NetworkProfile) -> float:
    """Share of the prediction spent waiting on round trips."""
    return breakdown(fp, profile).round_fraction
