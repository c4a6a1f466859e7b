import csv
import io
import json
import subprocess
import sys

import pytest

from lanmpc import bench
from lanmpc.bench import BenchConfig, ConfigError, emit_report, emit_table, run_bench, sweep
from lanmpc.cli import main


def test_gc_smoke_8x8x8():
    r = run_bench(BenchConfig("gc", 8, 8, 8, reps=1))
    assert r.ok and r.checksum == r.expected_checksum
    assert r.bytes_forward == r.expected_forward and r.stats_ok


@pytest.mark.parametrize("transport,kw", [("socket", {}), ("emulated", {"rtt": 1e-3})])
def test_gc_smoke_other_transports(transport, kw):
    r = run_bench(BenchConfig("gc", 8, 8, 8, transport=transport, reps=1, **kw))
    assert r.ok, r.error


def test_ss_batched_flushes_and_preprocessing():
    r = run_bench(BenchConfig("ss", 32, 32, 64, reps=2))
    assert r.ok, r.error
    assert r.flushes_party0 == r.flushes_party1 == 2  # one multiplication layer + final open
    assert r.bytes_forward == 16 * 32 * 32 + 8 * 32
    assert r.preprocessing_wall > 0
    assert r.rounds == 2


def test_ss_eager_flushes():
    r = run_bench(BenchConfig("ss", 6, 5, 64, flush_policy="eager", reps=1))
    assert r.ok and r.flushes_party0 == 31


def test_ss_32_bit_cross_check():
    assert run_bench(BenchConfig("ss", 4, 4, 32, reps=1)).ok


def test_cross_protocol_agreement():
    """Same seed, same matrix: GC at 32 bits and SS at 32 bits agree."""
    g = run_bench(BenchConfig("gc", 4, 4, 32, reps=1, seed=5))
    s = run_bench(BenchConfig("ss", 4, 4, 32, reps=1, seed=5))
    assert g.ok and s.ok and g.checksum == s.checksum


def test_cpu_not_above_wall():
    r = run_bench(BenchConfig("gc", 16, 16, 32, reps=1))
    slack = 0.02
    assert r.cpu_party0 <= r.wall_clock + slack and r.cpu_party1 <= r.wall_clock + slack


@pytest.mark.parametrize(
    "cfg",
    [
        BenchConfig("ss", bitwidth=16),
        BenchConfig("gc", bitwidth=12),
        BenchConfig("xx"),
        BenchConfig(transport="emulated"),
        BenchConfig(rtt=0.1),
        BenchConfig(flush_policy="sometimes"),
        BenchConfig(reps=0),
        BenchConfig(profile="moon"),
    ],
)
def test_invalid_configs(cfg):
    with pytest.raises(ConfigError):
        run_bench(cfg)


def test_failed_run_is_marked(monkeypatch):
    monkeypatch.setattr(bench, "_reference", lambda cfg, m, v: m[:, 0] + 1)
    r = run_bench(BenchConfig("gc", 2, 2, 8, reps=1))
    assert r.status == "FAILED" and not r.ok
    assert json.loads(emit_report(r, "json"))["status"] == "FAILED"


def test_csv_schema_and_round_trip():
    r = run_bench(BenchConfig("ss", 4, 4, 64, reps=1))
    text = emit_table([r])
    header = text.splitlines()[0]
    assert header == ",".join(bench.COLUMNS)
    assert header.startswith("schema_version,protocol,rows,cols,bitwidth")
    row = next(csv.DictReader(io.StringIO(text)))
    assert int(row["bytes_forward"]) == r.bytes_forward
    assert float(row["wall_clock"]) == r.wall_clock
    assert row["status"] == "ok"
    assert "\n" not in emit_report(r, "csv")


def test_json_round_trip_numeric_fields():
    r = run_bench(BenchConfig("gc", 2, 2, 8, reps=1))
    obj = json.loads(emit_report(r, "json"))
    for name in bench.REPORT_FIELDS:
        val = getattr(r, name)
        if isinstance(val, (int, float)) and not isinstance(val, bool):
            assert obj[name] == val


def test_unknown_format():
    with pytest.raises(ValueError):
        emit_report(run_bench(BenchConfig("gc", 1, 1, 8, reps=1)), "xml")


def test_sweep_rtt_monotone():
    reps = sweep(BenchConfig("ss", 4, 4, 64, flush_policy="eager", transport="emulated", rtt=0.0, reps=1),
                 "rtt", ["0", "0.002", "0.01"])
    walls = [r.wall_clock for r in reps]
    assert all(r.ok for r in reps)
    assert walls == sorted(walls)


def test_sweep_gate_api():
    reps = sweep(BenchConfig("gc", 4, 4, 16, reps=1), "gate_api", ["per-gate", "batched"])
    assert all(r.ok for r in reps)
    assert reps[1].wall_clock <= reps[0].wall_clock


def test_sweep_edge_cases():
    assert sweep(BenchConfig(), "rows", []) == []
    assert emit_table([]).strip() == ",".join(bench.COLUMNS)
    with pytest.raises(ConfigError):
        sweep(BenchConfig(), "colour", [1])


def test_cli_bench_exit_code(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["bench", "--protocol", "gc", "--rows", "2", "--cols", "2", "--bitwidth", "8",
                 "--reps", "1", "--out", str(out)]) == 0
    assert out.read_text().startswith("schema_version")
    assert main(["bench", "--protocol", "ss", "--bitwidth", "8"]) == 2


def test_cli_predict_json(capsys):
    assert main(["predict", "--protocol", "ss", "--rows", "1024", "--cols", "1024",
                 "--flush-policy", "eager", "--rtt", "0.04", "--bandwidth", "1G", "--format", "json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["rounds"] == 1024 * 1024 + 1 and obj["round_fraction"] > 0.9


def test_cli_sweep(capsys):
    assert main(["sweep", "--protocol", "ss", "--rows", "3", "--cols", "3", "--reps", "1",
                 "--axis", "flush_policy", "--values", "batched,eager"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["flushes_party0"] for r in rows] == ["2", "10"]


@pytest.mark.parametrize("protocol,roles", [("gc", ("garbler", "evaluator")), ("ss", ("p0", "p1"))])
def test_cli_two_process_socket(protocol, roles, tmp_path):
    import socket

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    args = ["--protocol", protocol, "--rows", "4", "--cols", "4", "--address", f"127.0.0.1:{port}"]
    procs = [subprocess.Popen([sys.executable, "-m", "lanmpc", "party", "--role", r, *args],
                              stdout=subprocess.PIPE, text=True) for r in roles]
    outs = [p.communicate(timeout=60)[0] for p in procs]
    assert [p.returncode for p in procs] == [0, 0]
    reports = [json.loads(o) for o in outs]
    assert all(r["status"] == "ok" for r in reports)
    assert reports[0]["bytes_sent"] == reports[1]["bytes_received"]
