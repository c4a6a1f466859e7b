import threading

import numpy as np
import pytest

from lanmpc.circuit import BooleanCircuit, GateKind
from lanmpc.garble import run_evaluator, run_garbler
from lanmpc.transport import pair_in_memory


def run_gc(circuit, gbits, ebits, *, profile=None, garbler_kw=None, evaluator_kw=None):
    """Both parties on threads over an in-memory pair; returns
    (outputs, garbler stats, evaluator stats, garbler transcript digest)."""
    g_ch, e_ch = pair_in_memory(profile, record=True)
    errors = []

    def garbler():
        try:
            run_garbler(circuit, gbits, g_ch, **(garbler_kw or {}))
        except BaseException as exc:  # noqa: BLE001
            errors.append(exc)
            g_ch.close()
            e_ch.close()

    t = threading.Thread(target=garbler)
    t.start()
    try:
        out = run_evaluator(circuit, ebits, e_ch, **(evaluator_kw or {}))
    finally:
        t.join()
    if errors:
        raise errors[0]
    return out, g_ch.stats(), e_ch.stats(), g_ch.transcript_digest()


def random_circuit(rng, n_gates, n_garbler=4, n_evaluator=4, n_outputs=None, p_inv=0.1):
    """Random topologically valid circuit; gates read any earlier wire."""
    n_in = n_garbler + n_evaluator
    kinds, in0, in1 = [], [], []
    for i in range(n_gates):
        avail = n_in + i
        r = rng.random()
        k = GateKind.INV if r < p_inv else (GateKind.AND if r < 0.55 else GateKind.XOR)
        kinds.append(int(k))
        in0.append(int(rng.integers(avail)))
        in1.append(-1 if k == GateKind.INV else int(rng.integers(avail)))
    n_wires = n_in + n_gates
    k_out = n_outputs if n_outputs is not None else min(n_gates, 8)
    outputs = sorted(rng.choice(np.arange(n_in, n_wires), size=k_out, replace=False).tolist()) \
        if n_gates else []
    return BooleanCircuit(
        n_wires, range(0, n_garbler), range(n_garbler, n_in), outputs,
        kinds, in0, in1, range(n_in, n_wires),
    )


def naive_eval(circuit, gbits, ebits):
    """Independent reference interpreter over Python dicts."""
    wires = {}
    for w, bit in zip(circuit.garbler_inputs, gbits):
        wires[w] = int(bit)
    for w, bit in zip(circuit.evaluator_inputs, ebits):
        wires[w] = int(bit)
    for gate in circuit.materialize().gates:
        if gate.kind == GateKind.INV:
            wires[gate.output] = 1 - wires[gate.inputs[0]]
        elif gate.kind == GateKind.AND:
            wires[gate.output] = wires[gate.inputs[0]] & wires[gate.inputs[1]]
        else:
            wires[gate.output] = wires[gate.inputs[0]] ^ wires[gate.inputs[1]]
    return [wires[w] for w in circuit.materialize().outputs.tolist()]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []
    config.addinivalue_line("markers", "acceptance: acceptance-criteria gate")


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)`` prints one PASS/FAIL line and asserts."""

    def record(n, ok, detail):
        line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}"
        print(line)
        request.config.stash[ACCEPTANCE_KEY].append(line)
        assert ok, line

    return record
