"""``lanmpc`` command line: bench, sweep, predict, and two-process party mode."""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from lanmpc import bench, sharing
from lanmpc.circuit import bits_to_int, build_matvec, int_to_bits
from lanmpc.costmodel import breakdown, gc_footprint, ss_footprint
from lanmpc.garble import InputMode, run_evaluator, run_garbler
from lanmpc.prg import Prg
from lanmpc.transport import PROFILES, NetworkProfile, connect_socket, listen_socket


def _bandwidth(text: str) -> float:
    """Bits per second; accepts suffixes k/M/G (decimal), e.g. ``200M``."""
    units = {"k": 1e3, "m": 1e6, "g": 1e9}
    t = text.strip().lower().removesuffix("bps").removesuffix("bit/s")
    if t and t[-1] in units:
        return float(t[:-1]) * units[t[-1]]
    return float(t)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--protocol", choices=bench.PROTOCOLS, default="gc")
    p.add_argument("--rows", type=int, default=8)
    p.add_argument("--cols", type=int, default=8)
    p.add_argument("--bitwidth", type=int, default=None, help="default 32 for gc, 64 for ss")
    p.add_argument("--transport", choices=bench.TRANSPORTS, default="mem")
    p.add_argument("--profile", choices=sorted(PROFILES), default=None)
    p.add_argument("--rtt", type=float, default=None, help="round-trip time in seconds")
    p.add_argument("--bandwidth", type=_bandwidth, default=None, help="bit/s, e.g. 200M or 1G")
    p.add_argument("--overhead", type=float, default=None, help="per-message overhead, seconds")
    p.add_argument("--flush-policy", choices=[x.value for x in sharing.FlushPolicy], default="batched")
    p.add_argument("--gate-api", choices=["batched", "per-gate"], default="batched")
    p.add_argument("--flush-bytes", type=int, default=64 * 1024)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--format", choices=bench.FORMATS, default="csv")
    p.add_argument("--calibrate", action="store_true", help="measure a dry run for the cost model")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")


def _config(args) -> bench.BenchConfig:
    bw = args.bitwidth or (32 if args.protocol == "gc" else 64)
    transport = args.transport
    shaped = args.profile or args.rtt is not None or args.bandwidth is not None or args.overhead is not None
    if shaped and transport == "mem":
        transport = "emulated"
    return bench.BenchConfig(
        protocol=args.protocol, rows=args.rows, cols=args.cols, bitwidth=bw,
        transport=transport, profile=args.profile, rtt=args.rtt, bandwidth=args.bandwidth,
        overhead=args.overhead, flush_policy=args.flush_policy, gate_api=args.gate_api,
        flush_bytes=args.flush_bytes, seed=args.seed, reps=args.reps, format=args.format,
        calibrate=args.calibrate,
    )


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bench(args) -> int:
    report = bench.run_bench(_config(args))
    _write(bench.emit_table([report], args.format), args.out)
    if not report.ok:
        print(f"FAILED: {report.error}", file=sys.stderr)
    return 0 if report.ok else 1


def cmd_sweep(args) -> int:
    values = [v for v in args.values.split(",") if v != ""]
    reports = bench.sweep(_config(args), args.axis, values)
    _write(bench.emit_table(reports, args.format), args.out)
    return 0 if all(r.ok for r in reports) else 1


def cmd_predict(args) -> int:
    cfg = _config(args)
    cfg.validate()
    profile = cfg.network_profile() or NetworkProfile()
    n = cfg.rows * cfg.cols
    if cfg.protocol == "gc":
        c = build_matvec(cfg.rows, cfg.cols, cfg.bitwidth)
        fp = gc_footprint(
            c.stats(), len(c.garbler_inputs) + len(c.evaluator_inputs), len(c.outputs),
            cpu_seconds=args.cpu,
        )
    else:
        depth = 1 if cfg.flush_policy == "batched" else n
        fp = ss_footprint(n, depth, cfg.rows, cpu_seconds=args.cpu)
    b = breakdown(fp, profile)
    row = {
        "protocol": cfg.protocol, "rows": cfg.rows, "cols": cfg.cols, "bitwidth": cfg.bitwidth,
        "flush_policy": cfg.flush_policy, "rtt": profile.rtt, "bandwidth": profile.bandwidth,
        "bytes_forward": fp.bytes_forward, "bytes_backward": fp.bytes_backward, "rounds": fp.rounds,
        "compute": b.compute, "transfer": b.transfer, "round_term": b.round_term,
        "predicted_seconds": b.total, "round_fraction": b.round_fraction,
    }
    if args.format == "json":
        text = json.dumps({k: (str(v) if v == float("inf") else v) for k, v in row.items()}) + "\n"
    else:
        text = ",".join(row) + "\n" + ",".join(str(v) for v in row.values()) + "\n"
    _write(text, args.out)
    return 0


def cmd_party(args) -> int:
    """One side of a two-process run over TCP.  Both processes derive the
    same workload from the seed, so the checking side can verify the result;
    this is a benchmark convenience, not a privacy-preserving deployment."""
    cfg = _config(args)
    cfg.transport = "socket"
    cfg.validate()
    roles = ("garbler", "evaluator") if cfg.protocol == "gc" else ("p0", "p1")
    if args.role not in roles:
        raise bench.ConfigError(f"{cfg.protocol} parties are {roles}, got {args.role!r}")
    m, v = bench._inputs(cfg)
    expected = bench._reference(cfg, m, v)
    listen = args.role in ("garbler", "p0")
    ch = listen_socket(args.address, timeout=args.timeout) if listen else connect_socket(
        args.address, timeout=args.timeout
    )
    with ch:
        t0, c0 = time.perf_counter(), time.process_time()
        result = None
        if cfg.protocol == "gc":
            c = build_matvec(cfg.rows, cfg.cols, cfg.bitwidth)
            kw = dict(gate_api=cfg.gate_api, input_mode=InputMode.DIRECT)
            if args.role == "garbler":
                run_garbler(c, int_to_bits(m.reshape(-1), cfg.bitwidth), ch, seed=cfg.seed,
                            flush_bytes=cfg.flush_bytes, **kw)
            else:
                result = bits_to_int(run_evaluator(c, int_to_bits(v, cfg.bitwidth), ch, **kw), cfg.bitwidth)
        else:
            i = 0 if args.role == "p0" else 1
            stores = sharing.dealer_generate(cfg.rows * cfg.cols, seed=f"{cfg.seed}:0")
            ms = sharing.share(m, Prg(f"{cfg.seed}:0", domain="matrix"))
            vs = sharing.share(v, Prg(f"{cfg.seed}:0", domain="vector"))
            y = sharing.matvec_ss(ms[i], vs[i], stores[i], ch, cfg.flush_policy)
            result = np.asarray(sharing.open(y, ch), dtype=np.uint64)
            if cfg.bitwidth < 64:
                result &= np.uint64((1 << cfg.bitwidth) - 1)
        wall, cpu = time.perf_counter() - t0, time.process_time() - c0
        st = ch.stats()
    ok = result is None or bench.checksum(result) == bench.checksum(expected)
    print(json.dumps({
        "role": args.role, "status": "ok" if ok else "FAILED", "wall_clock": wall, "cpu": cpu,
        "bytes_sent": st.bytes_sent, "bytes_received": st.bytes_received,
        "messages_sent": st.messages_sent, "flushes": st.flushes,
        "checksum": bench.checksum(result) if result is not None else "",
        "expected_checksum": bench.checksum(expected),
    }))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lanmpc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="run one benchmark configuration")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="vary one configuration field")
    _add_config_flags(p)
    p.add_argument("--axis", required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("predict", help="cost-model prediction without running")
    _add_config_flags(p)
    p.add_argument("--cpu", type=float, default=0.0, help="calibrated compute seconds")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("party", help="run one party of a two-process socket benchmark")
    _add_config_flags(p)
    p.add_argument("--role", choices=["garbler", "evaluator", "p0", "p1"], required=True)
    p.add_argument("--address", default="127.0.0.1:7766")
    p.add_argument("--timeout", type=float, default=30.0)
    p.set_defaults(func=cmd_party)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except bench.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
