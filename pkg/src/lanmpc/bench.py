"""Benchmark harness: matrix-vector products under both protocols.

Every run is also a correctness check.  The output is compared with a
plaintext oracle, and the channel counters are compared with the
closed-form transcript sizes.  A run that fails either check gets
status ``FAILED``.

Timing covers protocol execution only.  Circuit construction and input
generation are excluded.  For secret sharing, dealing triples and input
shares is timed separately as preprocessing.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from lanmpc import sharing
from lanmpc.circuit import bits_to_int, build_matvec, int_to_bits, matvec_oracle
from lanmpc.costmodel import gc_footprint, predict_runtime, ss_footprint
from lanmpc.garble import GateApi, InputMode, run_evaluator, run_garbler, transcript_bytes
from lanmpc.garble._backend import BACKEND
from lanmpc.parties import run_parties
from lanmpc.prg import Prg
from lanmpc.transport import PROFILES, NetworkProfile, pair_in_memory, pair_socket

SCHEMA_VERSION = 1
PROTOCOLS = ("gc", "ss")
TRANSPORTS = ("mem", "emulated", "socket")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


@dataclass
class BenchConfig:
    protocol: str = "gc"
    rows: int = 8
    cols: int = 8
    bitwidth: int = 32
    transport: str = "mem"
    profile: str | None = None
    rtt: float | None = None
    bandwidth: float | None = None
    overhead: float | None = None
    flush_policy: str = "batched"
    gate_api: str = "batched"
    flush_bytes: int = 64 * 1024
    seed: int = 1
    reps: int = 3
    format: str = "csv"
    calibrate: bool = False

    def network_profile(self) -> NetworkProfile | None:
        base = PROFILES[self.profile] if self.profile else None
        if base is None and self.rtt is None and self.bandwidth is None and self.overhead is None:
            return None
        base = base or NetworkProfile()
        return NetworkProfile(
            rtt=base.rtt if self.rtt is None else self.rtt,
            bandwidth=base.bandwidth if self.bandwidth is None else self.bandwidth,
            per_message_overhead=base.per_message_overhead if self.overhead is None else self.overhead,
        )

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}")
        if self.transport not in TRANSPORTS:
            raise ConfigError(f"transport must be one of {TRANSPORTS}")
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("rows and cols must be >= 1")
        if self.protocol == "gc" and self.bitwidth not in (8, 16, 32, 64):
            raise ConfigError("gc bitwidth must be 8, 16, 32 or 64")
        if self.protocol == "ss" and self.bitwidth not in (32, 64):
            raise ConfigError("ss bitwidth must be 64 (or 32 for cross-checks)")
        if self.profile is not None and self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}; known: {sorted(PROFILES)}")
        if self.transport == "emulated" and self.network_profile() is None:
            raise ConfigError("emulated transport needs --profile, --rtt or --bandwidth")
        if self.transport != "emulated" and self.network_profile() is not None:
            raise ConfigError("network shaping needs --transport emulated")
        try:
            sharing.FlushPolicy(self.flush_policy)
            GateApi(self.gate_api)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.flush_bytes < 1:
            raise ConfigError("flush_bytes must be >= 1")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")


@dataclass
class BenchReport:
    config: BenchConfig
    status: str = "ok"
    error: str = ""
    wall_clock: float = 0.0
    wall_min: float = 0.0
    wall_max: float = 0.0
    cpu_party0: float = 0.0
    cpu_party1: float = 0.0
    preprocessing_wall: float = 0.0
    preprocessing_cpu: float = 0.0
    bytes_forward: int = 0
    bytes_backward: int = 0
    messages_forward: int = 0
    messages_backward: int = 0
    flushes_party0: int = 0
    flushes_party1: int = 0
    expected_forward: int = 0
    expected_backward: int = 0
    stats_ok: bool = True
    checksum: str = ""
    expected_checksum: str = ""
    and_count: int = 0
    rounds: int = 0
    predicted_seconds: float = 0.0
    calibrated_cpu: float = 0.0
    throughput_gbps: float = 0.0
    backend: str = BACKEND
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def checksum(values) -> str:
    data = np.ascontiguousarray(values, dtype="<u8").tobytes()
    return hashlib.sha256(data).hexdigest()[:16]


def _inputs(cfg: BenchConfig) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(cfg.seed)
    mask = np.uint64((1 << cfg.bitwidth) - 1)
    m = rng.integers(0, 2**64, size=(cfg.rows, cfg.cols), dtype=np.uint64) & mask
    v = rng.integers(0, 2**64, size=cfg.cols, dtype=np.uint64) & mask
    return m, v


def _channels(cfg: BenchConfig, profile=None):
    if cfg.transport == "socket":
        return pair_socket()
    return pair_in_memory(profile if profile is not None else cfg.network_profile())


def _reference(cfg: BenchConfig, m, v) -> np.ndarray:
    if cfg.protocol == "gc":
        return matvec_oracle(m, v, cfg.bitwidth)
    out = sharing.ring_matvec(m, v)
    if cfg.bitwidth < 64:
        out &= np.uint64((1 << cfg.bitwidth) - 1)
    return out


class _GcJob:
    def __init__(self, cfg: BenchConfig, m, v):
        self.cfg = cfg
        self.circuit = build_matvec(cfg.rows, cfg.cols, cfg.bitwidth)
        self.gbits = int_to_bits(m.reshape(-1), cfg.bitwidth)
        self.ebits = int_to_bits(v, cfg.bitwidth)
        self.expected = transcript_bytes(self.circuit, InputMode.DIRECT)
        st = self.circuit.stats()
        n_in = len(self.circuit.garbler_inputs) + len(self.circuit.evaluator_inputs)
        self.footprint = gc_footprint(
            st, n_in, len(self.circuit.outputs),
            evaluator_inputs_direct=len(self.circuit.evaluator_inputs),
        )
        self.and_count = st.and_count

    def parties(self):
        cfg, c = self.cfg, self.circuit
        kw = dict(gate_api=cfg.gate_api, input_mode=InputMode.DIRECT)

        def garbler(ch):
            run_garbler(c, self.gbits, ch, seed=cfg.seed, flush_bytes=cfg.flush_bytes, **kw)

        def evaluator(ch):
            return bits_to_int(run_evaluator(c, self.ebits, ch, **kw), cfg.bitwidth)

        return garbler, evaluator

    def result(self, r0, r1):
        return r1.value

    def expected_flushes(self):
        return None


class _SsJob:
    def __init__(self, cfg: BenchConfig, m, v):
        self.cfg = cfg
        self.m, self.v = m, v
        self.policy = sharing.FlushPolicy(cfg.flush_policy)
        n = cfg.rows * cfg.cols
        depth = 1 if self.policy is sharing.FlushPolicy.BATCHED else n
        self.footprint = ss_footprint(n, depth, cfg.rows)
        self.expected = {"forward": self.footprint.bytes_forward, "backward": self.footprint.bytes_backward}
        self.and_count = 0
        self.pre_wall = self.pre_cpu = 0.0

    def preprocess(self, rep: int):
        t0, c0 = time.perf_counter(), time.process_time()
        cfg = self.cfg
        stores = sharing.dealer_generate(cfg.rows * cfg.cols, seed=f"{cfg.seed}:{rep}")
        ms = sharing.share(self.m, Prg(f"{cfg.seed}:{rep}", domain="matrix"))
        vs = sharing.share(self.v, Prg(f"{cfg.seed}:{rep}", domain="vector"))
        self.pre_wall = time.perf_counter() - t0
        self.pre_cpu = time.process_time() - c0
        self.material = stores, ms, vs

    def parties(self):
        stores, ms, vs = self.material
        policy = self.policy

        def party(i):
            def run(ch):
                y = sharing.matvec_ss(ms[i], vs[i], stores[i], ch, policy)
                return sharing.open(y, ch)
            return run

        return party(0), party(1)

    def result(self, r0, r1):
        if not np.array_equal(r0.value, r1.value):
            raise AssertionError("parties opened different results")
        out = np.asarray(r1.value, dtype=np.uint64)
        if self.cfg.bitwidth < 64:
            out = out & np.uint64((1 << self.cfg.bitwidth) - 1)
        return out

    def expected_flushes(self):
        n = self.cfg.rows * self.cfg.cols
        mult = 1 if self.policy is sharing.FlushPolicy.BATCHED else n
        return mult + 1


def _run_once(cfg: BenchConfig, job, profile=None):
    ch0, ch1 = _channels(cfg, profile)
    try:
        fn0, fn1 = job.parties()
        r0, r1, wall = run_parties(fn0, fn1, ch0, ch1)
        return r0, r1, wall, ch0.stats(), ch1.stats()
    finally:
        ch0.close()
        ch1.close()


def calibrate_cpu(cfg: BenchConfig, job=None) -> float:
    """Wall-clock of one unshaped in-memory run: the compute term of the model."""
    dry = dataclasses.replace(cfg, transport="mem", profile=None, rtt=None, bandwidth=None,
                              overhead=None, reps=1)
    if job is None:
        m, v = _inputs(dry)
        job = _GcJob(dry, m, v) if dry.protocol == "gc" else _SsJob(dry, m, v)
    if isinstance(job, _SsJob):
        job.preprocess(0)
    return _run_once(dry, job, profile=None)[2]


def run_bench(cfg: BenchConfig) -> BenchReport:
    cfg.validate()
    m, v = _inputs(cfg)
    expected = _reference(cfg, m, v)
    job = _GcJob(cfg, m, v) if cfg.protocol == "gc" else _SsJob(cfg, m, v)
    report = BenchReport(config=cfg, expected_checksum=checksum(expected))
    report.and_count = job.and_count
    report.rounds = job.footprint.rounds
    report.expected_forward = job.expected["forward"]
    report.expected_backward = job.expected["backward"]

    walls, cpu0, cpu1, pre_w, pre_c = [], [], [], [], []
    try:
        for rep in range(cfg.reps):
            if isinstance(job, _SsJob):
                job.preprocess(rep)
                pre_w.append(job.pre_wall)
                pre_c.append(job.pre_cpu)
            r0, r1, wall, s0, s1 = _run_once(cfg, job)
            out = job.result(r0, r1)
            walls.append(wall)
            cpu0.append(r0.cpu)
            cpu1.append(r1.cpu)
            report.checksum = checksum(out)
            if report.checksum != report.expected_checksum:
                report.failures.append(f"rep {rep}: output differs from oracle")
            counters = (s0.bytes_sent, s1.bytes_sent, s1.bytes_received, s0.bytes_received)
            want = (report.expected_forward, report.expected_backward,
                    report.expected_forward, report.expected_backward)
            if counters != want:
                report.failures.append(f"rep {rep}: byte counters {counters} != {want}")
            flushes = job.expected_flushes()
            if flushes is not None and (s0.flushes, s1.flushes) != (flushes, flushes):
                report.failures.append(
                    f"rep {rep}: flushes ({s0.flushes}, {s1.flushes}) != {flushes} per party"
                )
            report.bytes_forward, report.bytes_backward = s0.bytes_sent, s1.bytes_sent
            report.messages_forward, report.messages_backward = s0.messages_sent, s1.messages_sent
            report.flushes_party0, report.flushes_party1 = s0.flushes, s1.flushes
    except Exception as exc:  # noqa: BLE001 - reported, not raised
        report.status = "FAILED"
        report.error = f"{type(exc).__name__}: {exc}"
        return report

    report.wall_clock = statistics.median(walls)
    report.wall_min, report.wall_max = min(walls), max(walls)
    report.cpu_party0 = statistics.median(cpu0)
    report.cpu_party1 = statistics.median(cpu1)
    if pre_w:
        report.preprocessing_wall = statistics.median(pre_w)
        report.preprocessing_cpu = statistics.median(pre_c)
    if report.wall_clock > 0:
        report.throughput_gbps = report.bytes_forward * 8 / report.wall_clock / 1e9
    report.stats_ok = not any("counters" in f or "flushes" in f for f in report.failures)
    if report.failures:
        report.status = "FAILED"
        report.error = "; ".join(report.failures)

    if cfg.calibrate:
        report.calibrated_cpu = calibrate_cpu(cfg, job)
    profile = cfg.network_profile() or NetworkProfile()
    report.predicted_seconds = predict_runtime(job.footprint.with_cpu(report.calibrated_cpu), profile)
    return report


# -- reporting ----------------------------------------------------------------

CONFIG_FIELDS = [f.name for f in dataclasses.fields(BenchConfig) if f.name != "format"]
REPORT_FIELDS = [
    f.name for f in dataclasses.fields(BenchReport) if f.name not in ("config", "failures")
]
COLUMNS = ["schema_version"] + CONFIG_FIELDS + REPORT_FIELDS


def _row(report: BenchReport) -> dict:
    row = {"schema_version": SCHEMA_VERSION}
    for name in CONFIG_FIELDS:
        row[name] = getattr(report.config, name)
    for name in REPORT_FIELDS:
        row[name] = getattr(report, name)
    return row


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return "inf" if math.isinf(x) else repr(x)
    return x


def csv_header() -> str:
    return ",".join(COLUMNS)


def emit_report(report: BenchReport, fmt: str = "csv") -> str:
    """One CSV row (no header) or one JSON object, fields in ``COLUMNS`` order."""
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="").writerow([_cell(v) for v in _row(report).values()])
        return buf.getvalue()
    if fmt == "json":
        row = _row(report)
        row["failures"] = list(report.failures)
        return json.dumps({k: (str(v) if isinstance(v, float) and math.isinf(v) else v)
                           for k, v in row.items()})
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def emit_table(reports, fmt: str = "csv") -> str:
    if fmt == "csv":
        return "\n".join([csv_header(), *(emit_report(r, "csv") for r in reports)]) + "\n"
    return "\n".join(emit_report(r, fmt) for r in reports) + ("\n" if reports else "")


def parse_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


# -- sweeps -------------------------------------------------------------------

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(BenchConfig)}


def _coerce(axis: str, value):
    t = str(_FIELD_TYPES[axis])
    if isinstance(value, str):
        if "float" in t:
            return float(value)
        if "int" in t:
            return int(value)
        if "bool" in t:
            return value.lower() in ("1", "true", "yes")
    return value


def sweep(template: BenchConfig, axis: str, values) -> list[BenchReport]:
    if axis not in _FIELD_TYPES or axis == "format":
        raise ConfigError(f"unknown sweep axis {axis!r}")
    reports = []
    for value in values:
        cfg = dataclasses.replace(template, **{axis: _coerce(axis, value)})
        reports.append(run_bench(cfg))
    return reports
