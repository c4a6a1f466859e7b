"""Boolean circuits: construction, Bristol Fashion I/O, plaintext evaluation."""
from lanmpc.circuit.bristol import dump_bristol, load_bristol, parse_bristol
from lanmpc.circuit.builder import (
    SUPPORTED_WIDTHS,
    CircuitBuilder,
    add_words,
    builder_add,
    builder_mul,
    mul_words,
)
from lanmpc.circuit.core import (
    BooleanCircuit,
    CircuitError,
    CircuitStats,
    Gate,
    GateChunk,
    GateKind,
    bits_to_int,
    eval_plaintext,
    int_to_bits,
    stats,
)
from lanmpc.circuit.matvec import MatvecCircuit, build_matvec, matvec_oracle

__all__ = [
    "SUPPORTED_WIDTHS",
    "BooleanCircuit",
    "CircuitBuilder",
    "CircuitError",
    "CircuitStats",
    "Gate",
    "GateChunk",
    "GateKind",
    "MatvecCircuit",
    "add_words",
    "bits_to_int",
    "build_matvec",
    "builder_add",
    "builder_mul",
    "dump_bristol",
    "eval_plaintext",
    "int_to_bits",
    "load_bristol",
    "matvec_oracle",
    "mul_words",
    "parse_bristol",
    "stats",
]
