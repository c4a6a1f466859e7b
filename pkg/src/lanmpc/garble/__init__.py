"""Half-gates garbling with free XOR over an instrumented channel."""
from lanmpc.garble._backend import BACKEND
from lanmpc.garble.engine import (
    FLUSH_BYTES,
    Evaluator,
    FreeXorAudit,
    FreeXorViolation,
    GateApi,
    Garbler,
    InputMode,
    LabelDelivery,
    TrustedDelivery,
    run_evaluator,
    run_garbler,
    transcript_bytes,
)
from lanmpc.garble.halfgates import (
    TABLE_BYTES,
    GarbledAndTable,
    eval_and,
    eval_xor,
    garble_and,
    garble_xor,
)
from lanmpc.garble.hashing import hash, hash_batch

__all__ = [
    "BACKEND",
    "FLUSH_BYTES",
    "TABLE_BYTES",
    "Evaluator",
    "FreeXorAudit",
    "FreeXorViolation",
    "GarbledAndTable",
    "GateApi",
    "Garbler",
    "InputMode",
    "LabelDelivery",
    "TrustedDelivery",
    "eval_and",
    "eval_xor",
    "garble_and",
    "garble_xor",
    "hash",
    "hash_batch",
    "run_evaluator",
    "run_garbler",
    "transcript_bytes",
]
