"""Versioned line-delimited run logs with bit-exact replay.

Layout: a version line, key-value sections for the full configuration
(so a log is self-contained), one whitespace-separated line per frame,
and a terminating [end] section with the verdict and metrics. Floats
are written with repr() so they round-trip exactly; replaying a log
re-feeds the recorded pilot inputs through a fresh World and must
reproduce every state bit for bit.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .config import dump_gains, dump_mapping, dump_params, load_gains_pairs, load_mapping_pairs, load_params_pairs, parse_pairs
from .control import DesiredState
from .course import CourseSpec, dump_course, load_course_pairs, path_length
from .errors import LogError
from .mapping import MappingConfig, PilotInput
from .model import ActuatorCommand, RobotParams, SimState
from .synthesis import GainSet
from .world import Frame, World, WorldOptions

__all__ = ["RunRecord", "write_log", "read_log", "replay", "verify_replay"]

LOG_VERSION = 1

_COLUMNS = (
    "tick seq p_x gamma_h "
    "x_w theta_R xdot_w thetadot_R y_w x_world gamma gammadot "
    "theta_1 thetadot_1 theta_wL theta_wR t "
    "x_des xdot_des theta_R_des thetadot_R_des gamma_des gammadot_des theta_1_des "
    "tau_L tau_R tau_hip flags odo_x odo_y odo_gamma spring"
).split()


@dataclass
class RunRecord:
    params: RobotParams
    gains: GainSet
    mapping: MappingConfig
    options: WorldOptions
    course: CourseSpec | None
    frames: list[Frame]
    verdict: str | None = None
    completion_time: float | None = None
    path_length: float | None = None
    gains_changed: bool = False

    def odometry_trace(self) -> list[tuple[float, float, float]]:
        return [f.odometry for f in self.frames]


def _frame_line(f: Frame) -> str:
    s = f.state
    d = f.desired
    c = f.command
    vals = [
        str(f.tick), str(f.seq), repr(f.p_x), repr(f.gamma_h),
        repr(s.x_w), repr(s.theta_R), repr(s.xdot_w), repr(s.thetadot_R),
        repr(s.y_w), repr(s.x_world), repr(s.gamma), repr(s.gammadot),
        repr(s.theta_1), repr(s.thetadot_1), repr(s.theta_wL), repr(s.theta_wR), repr(s.t),
        repr(d.x_des), repr(d.xdot_des), repr(d.theta_R_des), repr(d.thetadot_R_des),
        repr(d.gamma_des), repr(d.gammadot_des), repr(d.theta_1_des),
        repr(c.tau_L), repr(c.tau_R), repr(c.tau_hip), str(f.flags),
        repr(f.odometry[0]), repr(f.odometry[1]), repr(f.odometry[2]), repr(f.spring_force),
    ]
    return " ".join(vals)


def _parse_frame(line: str, lineno: int) -> Frame:
    parts = line.split()
    if len(parts) != len(_COLUMNS):
        raise LogError(f"expected {len(_COLUMNS)} fields, got {len(parts)}", lineno)
    try:
        tick = int(parts[0])
        seq = int(parts[1])
        flags = int(parts[27])
        f = [float(v) for v in parts[2:27]] + [float(v) for v in parts[28:]]
    except ValueError as exc:
        raise LogError(f"bad numeric field: {exc}", lineno) from exc
    state = SimState(
        x_w=f[2], theta_R=f[3], xdot_w=f[4], thetadot_R=f[5], y_w=f[6], x_world=f[7],
        gamma=f[8], gammadot=f[9], theta_1=f[10], thetadot_1=f[11],
        theta_wL=f[12], theta_wR=f[13], t=f[14],
    )
    desired = DesiredState(
        x_des=f[15], xdot_des=f[16], theta_R_des=f[17], thetadot_R_des=f[18],
        gamma_des=f[19], gammadot_des=f[20], theta_1_des=f[21],
    )
    command = ActuatorCommand(tau_L=f[22], tau_R=f[23], tau_hip=f[24])
    return Frame(tick=tick, t=f[14], seq=seq, p_x=f[0], gamma_h=f[1], state=state,
                 desired=desired, command=command, flags=flags,
                 odometry=(f[25], f[26], f[27]), spring_force=f[28])


def write_log(record: RunRecord, path) -> None:
    lines = [f"wiplog {LOG_VERSION}"]
    lines.append("[params]")
    lines.append(dump_params(record.params).rstrip("\n"))
    lines.append("[mapping]")
    lines.append(dump_mapping(record.mapping).rstrip("\n"))
    lines.append("[gains]")
    lines.append(dump_gains(record.gains).rstrip("\n"))
    if record.course is not None:
        lines.append("[course]")
        lines.append(dump_course(record.course).rstrip("\n"))
    lines.append("[run]")
    for key, value in dataclasses.asdict(record.options).items():
        lines.append(f"{key} = {value!r}")
    lines.append("[frames]")
    lines.append("# " + " ".join(_COLUMNS))
    lines.extend(_frame_line(f) for f in record.frames)
    lines.append("[end]")
    lines.append(f"verdict = {record.verdict if record.verdict is not None else 'none'}")
    ct = record.completion_time
    lines.append(f"completion_time = {repr(ct) if ct is not None else 'none'}")
    pl = record.path_length
    lines.append(f"path_length = {repr(pl) if pl is not None else 'none'}")
    lines.append(f"gains_changed = {int(record.gains_changed)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_log(path) -> RunRecord:
    raw = Path(path).read_text().splitlines()
    if not raw:
        raise LogError("empty log file", 1)
    head = raw[0].split()
    if len(head) != 2 or head[0] != "wiplog":
        raise LogError(f"not a run log: {raw[0]!r}", 1)
    if int(head[1]) != LOG_VERSION:
        raise LogError(f"unsupported log version {head[1]} (expected {LOG_VERSION})", 1)

    sections: dict[str, list[tuple[int, str]]] = {}
    current: str | None = None
    for lineno, line in enumerate(raw[1:], start=2):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1]
            sections.setdefault(current, [])
            continue
        if current is None:
            raise LogError(f"content before first section: {line!r}", lineno)
        sections[current].append((lineno, line))

    for required in ("params", "mapping", "gains", "run", "frames"):
        if required not in sections:
            raise LogError(f"missing [{required}] section")
    if "end" not in sections:
        last = 0
        for lineno, line in sections["frames"]:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                last = _parse_frame(stripped, lineno).tick
            except LogError:
                break
        raise LogError(f"truncated log: no [end] section; last valid frame {last}")

    def section_text(name: str) -> str:
        return "\n".join(line for _, line in sections[name])

    params = load_params_pairs(parse_pairs(section_text("params")))
    mapping = load_mapping_pairs(parse_pairs(section_text("mapping")))
    gains = load_gains_pairs(parse_pairs(section_text("gains")))
    course = None
    if "course" in sections:
        course = load_course_pairs(parse_pairs(section_text("course")))

    run_kv = dict(parse_pairs(section_text("run")))
    try:
        options = WorldOptions(
            rate_hz=float(run_kv["rate_hz"]),
            controller_divisor=int(run_kv["controller_divisor"]),
            wheel_friction=float(run_kv["wheel_friction"]),
            command_delay_ticks=int(run_kv["command_delay_ticks"]),
            stale_timeout=float(run_kv["stale_timeout"]),
            stale_ramp=float(run_kv["stale_ramp"]),
            hip_height=float(run_kv["hip_height"]),
        )
    except KeyError as exc:
        raise LogError(f"missing run key {exc}") from exc

    frames: list[Frame] = []
    for lineno, line in sections["frames"]:
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        frames.append(_parse_frame(stripped, lineno))
    for i, f in enumerate(frames, start=1):
        if f.tick != i:
            raise LogError(f"frame ticks not contiguous at tick {f.tick} (expected {i})")

    end_kv = dict(parse_pairs(section_text("end")))
    verdict = end_kv.get("verdict")
    verdict = None if verdict in (None, "none") else verdict
    ct = end_kv.get("completion_time")
    pl = end_kv.get("path_length")
    return RunRecord(
        params=params, gains=gains, mapping=mapping, options=options, course=course,
        frames=frames, verdict=verdict,
        completion_time=None if ct in (None, "none") else float(ct),
        path_length=None if pl in (None, "none") else float(pl),
        gains_changed=bool(int(end_kv.get("gains_changed", "0"))),
    )


def course_path_length(frames: list[Frame], course: CourseSpec | None,
                       t_cross: float | None) -> float | None:
    """Distance metric shared by harness, server, and replay: odometry path
    from countdown end to the goal crossing."""
    if course is None or t_cross is None:
        return None
    trace = [f.odometry for f in frames if course.countdown <= f.t <= t_cross]
    return path_length(trace) if len(trace) >= 2 else None


def replay(record: RunRecord) -> RunRecord:
    """Re-feed the logged pilot inputs through a fresh World."""
    world = World(record.params, record.gains, record.mapping, record.course,
                  record.options)
    frames: list[Frame] = []
    for logged in record.frames:
        inp = PilotInput(p_x=logged.p_x, gamma_h=logged.gamma_h, t=logged.t, seq=logged.seq)
        frames.append(world.tick(inp))
    new = RunRecord(
        params=record.params, gains=record.gains, mapping=record.mapping,
        options=record.options, course=record.course, frames=frames,
        gains_changed=world.gains_changed,
    )
    if world.judge is not None:
        new.verdict = world.judge.verdict
        new.completion_time = world.judge.completion_time
        new.path_length = course_path_length(frames, record.course, world.judge.t_cross)
    return new


def verify_replay(record: RunRecord) -> tuple[bool, int | None]:
    """Replay and compare states, flags, verdict, and metrics bit for bit.
    Returns (ok, first bad tick)."""
    redone = replay(record)
    for a, b in zip(record.frames, redone.frames):
        if a.state.as_tuple() != b.state.as_tuple() or a.flags != b.flags \
                or a.command != b.command:
            return False, a.tick
    same = (record.verdict, record.completion_time, record.path_length) == \
        (redone.verdict, redone.completion_time, redone.path_length)
    if not same:
        return False, record.frames[-1].tick if record.frames else None
    return True, None
