"""Command-line interface.

Subcommands: synth, analyze, bench, replay, serve. Exit codes: 0 on
success, 1 for usage errors, 2 for runtime failures. WIPSIM_PORT and
WIPSIM_LOG_DIR override the serve defaults.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .config import (
    dump_gains,
    load_gains,
    load_mapping,
    load_params,
    load_qr,
)
from .course import load_course, straight_course, three_cone_course
from .errors import ConfigError, LogError, SynthesisError
from .mapping import default_mapping, speed_run_mapping
from .model import default_params
from .pilots import CustomPilot, scripted_pilot
from .runlog import read_log, replay, verify_replay
from .server import ServerConfig, TeleopServer
from .synthesis import (
    GainSet,
    cruise_Q,
    default_Q,
    default_R,
    discretize,
    finite_difference_model,
    linearize,
    lqr_gains,
    solve_dare,
    spectral_radius,
    synthesize,
)
from .world import World, WorldOptions

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="wipsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--params", help="robot parameter file")
        sp.add_argument("--gains", help="gain file (default: synthesize)")
        sp.add_argument("--mapping", help="mapping config file")
        sp.add_argument("--rate", type=float, default=1000.0, help="tick rate, Hz")
        sp.add_argument("--controller-divisor", type=int, default=1,
                        help="run controllers every k-th tick")
        sp.add_argument("--wheel-friction", type=float, default=0.0)
        sp.add_argument("--command-delay", type=int, default=0,
                        help="actuation delay, ticks")

    sp = sub.add_parser("synth", help="synthesize balance gains")
    sp.add_argument("--params")
    sp.add_argument("--qr", help="cost weight file (Q_diag, R)")
    sp.add_argument("--cruise", action="store_true",
                    help="use the reduced position-tracking cost preset")
    sp.add_argument("--ts", type=float, default=1e-3, help="sampling period, s")
    sp.add_argument("-o", "--output", help="write gain file here (default stdout)")

    sp = sub.add_parser("analyze", help="print model eigenvalues and stability margin")
    sp.add_argument("--params")
    sp.add_argument("--gains")
    sp.add_argument("--ts", type=float, default=1e-3)
    sp.add_argument("--csv", help="also write a CSV summary here")

    sp = sub.add_parser("bench", help="run scripted benchmark courses")
    common(sp)
    sp.add_argument("--course", default="three-cone",
                    help="course file, or builtin: three-cone | straight")
    sp.add_argument("--mapping-mode", choices=["velocity", "acceleration"],
                    help="override the mapping mode")
    sp.add_argument("--pilot", default="weave",
                    help="straightline | weave | step | custom:<file>")
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--log", help="directory for per-run logs")
    sp.add_argument("--csv", help="write per-run CSV here")

    sp = sub.add_parser("replay", help="re-simulate a run log and verify it")
    sp.add_argument("log")

    sp = sub.add_parser("serve", help="live teleoperation session")
    common(sp)
    sp.add_argument("--course", help="course file or builtin name (optional)")
    sp.add_argument("--port", type=int,
                    default=int(os.environ.get("WIPSIM_PORT", "8765")))
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--transport", choices=["stream", "datagram"], default="stream")
    sp.add_argument("--telemetry-hz", type=float, default=60.0)
    sp.add_argument("--log", default=os.environ.get("WIPSIM_LOG_DIR"))
    return parser


def _load_common(args):
    params = load_params(args.params) if args.params else default_params()
    mapping = load_mapping(args.mapping) if args.mapping else default_mapping()
    options = WorldOptions(
        rate_hz=args.rate,
        controller_divisor=args.controller_divisor,
        wheel_friction=args.wheel_friction,
        command_delay_ticks=args.command_delay,
    )
    return params, mapping, options


def _resolve_course(name_or_path: str):
    if name_or_path in ("three-cone", "three_cone"):
        return three_cone_course()
    if name_or_path == "straight":
        return straight_course()
    return load_course(name_or_path)


def _cmd_synth(args) -> int:
    params = load_params(args.params) if args.params else default_params()
    if args.qr:
        q_diag, r = load_qr(args.qr)
        Q, R = np.diag(q_diag), np.array([[r]])
    elif args.cruise:
        Q, R = cruise_Q(), default_R()
    else:
        Q, R = None, None
    model, gains = synthesize(params, T_s=args.ts, Q=Q, R=R)
    text = dump_gains(gains)
    if args.output:
        Path(args.output).write_text(text)
        K = np.array(gains.K).reshape(1, -1)
        rho = spectral_radius(model.A_d - model.B_d @ K)
        print(f"wrote {args.output} (closed-loop spectral radius {rho:.6f})")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_analyze(args) -> int:
    params = load_params(args.params) if args.params else default_params()
    model = discretize(linearize(params), args.ts)
    if args.gains:
        gains = load_gains(args.gains)
    else:
        P = solve_dare(model.A_d, model.B_d, default_Q(), default_R())
        K = lqr_gains(model.A_d, model.B_d, P, default_R())
        gains = GainSet(K=tuple(float(k) for k in K))
    K = np.array(gains.k_effective()).reshape(1, -1)
    open_eigs = np.linalg.eigvals(model.A)
    rho_open = spectral_radius(model.A_d)
    rho_closed = spectral_radius(model.A_d - model.B_d @ K)
    A_fd, B_fd = finite_difference_model(params)
    lin_err = max(float(np.max(np.abs(A_fd - model.A))), float(np.max(np.abs(B_fd - model.B))))

    print("continuous eigenvalues:", ", ".join(f"{e:.4f}" for e in sorted(open_eigs.real)))
    print(f"discrete open-loop spectral radius:   {rho_open:.6f}")
    print(f"discrete closed-loop spectral radius: {rho_closed:.6f}")
    print(f"stabilizing: {'yes' if rho_closed < 1.0 else 'NO'}")
    print(f"linearization vs finite differences, max abs error: {lin_err:.3e}")
    if args.csv:
        lines = ["quantity,value"]
        for i, e in enumerate(sorted(open_eigs.real)):
            lines.append(f"eig_{i},{e!r}")
        lines.append(f"rho_open,{rho_open!r}")
        lines.append(f"rho_closed,{rho_closed!r}")
        lines.append(f"linearization_error,{lin_err!r}")
        Path(args.csv).write_text("\n".join(lines) + "\n")
    return 0


def _make_pilot(spec: str, countdown: float):
    if spec.startswith("custom:"):
        waypoints = []
        for line in Path(spec[7:]).read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            t, px, gh = (float(v) for v in line.split(","))
            waypoints.append((t, px, gh))
        return CustomPilot(waypoints)
    return scripted_pilot(spec, countdown=countdown)


def _cmd_bench(args) -> int:
    params, mapping, options = _load_common(args)
    if args.mapping is None and args.pilot == "straightline":
        mapping = speed_run_mapping()  # speed course runs at the hardware cap
    if args.mapping_mode and args.mapping_mode != mapping.mode:
        import dataclasses

        mapping = dataclasses.replace(mapping, mode=args.mapping_mode)
    course = _resolve_course(args.course)
    if args.gains:
        gains = load_gains(args.gains)
    else:
        _, gains = synthesize(params, T_s=1.0 / args.rate, Q=cruise_Q())
    pilot = _make_pilot(args.pilot, course.countdown)

    records = bench_mod.run_many(params, gains, mapping, course, pilot, args.runs, options)
    summary = bench_mod.summarize(records)
    print(summary.table())
    csv_lines = summary.csv_rows(records)
    if args.csv:
        Path(args.csv).write_text("\n".join(csv_lines) + "\n")
    if args.log:
        from .runlog import write_log

        directory = Path(args.log)
        directory.mkdir(parents=True, exist_ok=True)
        for i, record in enumerate(records, start=1):
            write_log(record, directory / f"run_{i:03d}.log")
        Path(directory / "summary.csv").write_text("\n".join(csv_lines) + "\n")
    return 0


def _cmd_replay(args) -> int:
    record = read_log(args.log)
    ok, bad_tick = verify_replay(record)
    redone = replay(record)
    ct = "-" if redone.completion_time is None else f"{redone.completion_time:.3f}"
    pl = "-" if redone.path_length is None else f"{redone.path_length:.3f}"
    print(f"verdict={redone.verdict} completion_time={ct} path_length={pl}")
    if ok:
        print("replay: bit-identical")
        return 0
    print(f"replay: MISMATCH at tick {bad_tick}", file=sys.stderr)
    return 2


def _cmd_serve(args) -> int:
    params, mapping, options = _load_common(args)
    course = _resolve_course(args.course) if args.course else None
    if args.gains:
        gains = load_gains(args.gains)
    else:
        _, gains = synthesize(params, T_s=1.0 / args.rate)
    world = World(params, gains, mapping, course, options)
    server = TeleopServer(world, ServerConfig(
        host=args.host, port=args.port, transport=args.transport,
        telemetry_hz=args.telemetry_hz, log_dir=args.log))
    try:
        server.start()
    except OSError as exc:
        print(f"wipsim serve: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 2
    print(f"listening on {args.host}:{server.port} ({args.transport}), "
          f"rate {options.rate_hz:.0f} Hz, telemetry {args.telemetry_hz:.0f} Hz")
    try:
        while not server._stop.is_set():
            time.sleep(0.2)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "synth": _cmd_synth,
        "analyze": _cmd_analyze,
        "bench": _cmd_bench,
        "replay": _cmd_replay,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, LogError, SynthesisError, FileNotFoundError) as exc:
        print(f"wipsim {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
