"""Headless benchmark harness: scripted pilot in, RunRecord out.

Runs are fully deterministic, so repeated runs of one configuration are
regression checks rather than statistics; the summary still reports
mean/min/max to mirror how timed agility trials are tabulated.
"""

from __future__ import annotations

from dataclasses import dataclass

from .course import CourseSpec
from .errors import ConfigError
from .mapping import MappingConfig
from .model import RobotParams
from .runlog import RunRecord, course_path_length
from .synthesis import GainSet
from .world import World, WorldOptions

__all__ = ["run_course", "run_many", "BenchSummary", "summarize", "convex_hull_area"]


def run_course(params: RobotParams, gains: GainSet, mapping: MappingConfig,
               course: CourseSpec, pilot, options: WorldOptions = WorldOptions(),
               max_sim_s: float | None = None) -> RunRecord:
    """Drive one run to a terminal verdict (or the hard time limit)."""
    world = World(params, gains, mapping, course, options)
    dt = world.dt
    limit = max_sim_s if max_sim_s is not None else course.countdown + course.timeout + 10.0
    frames = []
    seq = 0
    while True:
        t = world.tick_count * dt
        seq += 1
        frames.append(world.tick(pilot.input_at(t, seq)))
        status = world.judge.status
        if status in ("success", "collision", "out_of_bounds", "fell", "timeout"):
            break
        if t >= limit:
            break
    record = RunRecord(
        params=params, gains=gains, mapping=mapping, options=options, course=course,
        frames=frames, verdict=world.judge.verdict,
        completion_time=world.judge.completion_time,
        gains_changed=world.gains_changed,
    )
    record.path_length = course_path_length(frames, course, world.judge.t_cross)
    return record


def run_many(params: RobotParams, gains: GainSet, mapping: MappingConfig,
             course: CourseSpec, pilot, runs: int,
             options: WorldOptions = WorldOptions()) -> list[RunRecord]:
    if runs < 1:
        raise ConfigError("need at least one run")
    return [run_course(params, gains, mapping, course, pilot, options)
            for _ in range(runs)]


@dataclass(frozen=True)
class BenchSummary:
    runs: int
    successes: int
    failures: dict[str, int]
    mean_time: float | None
    min_time: float | None
    max_time: float | None
    mean_path: float | None

    def table(self) -> str:
        rows = [
            ("runs", str(self.runs)),
            ("successes", str(self.successes)),
        ]
        for reason, count in sorted(self.failures.items()):
            rows.append((f"failed ({reason})", str(count)))
        fmt = lambda v: "-" if v is None else f"{v:.3f}"
        rows += [
            ("completion time mean [s]", fmt(self.mean_time)),
            ("completion time min [s]", fmt(self.min_time)),
            ("completion time max [s]", fmt(self.max_time)),
            ("path length mean [m]", fmt(self.mean_path)),
        ]
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)

    def csv_rows(self, records: list[RunRecord]) -> list[str]:
        lines = ["run,verdict,completion_time_s,path_length_m"]
        for i, r in enumerate(records, start=1):
            ct = "" if r.completion_time is None else f"{r.completion_time:.6f}"
            pl = "" if r.path_length is None else f"{r.path_length:.6f}"
            lines.append(f"{i},{r.verdict},{ct},{pl}")
        return lines


def summarize(records: list[RunRecord]) -> BenchSummary:
    times = [r.completion_time for r in records if r.verdict == "success"]
    paths = [r.path_length for r in records
             if r.verdict == "success" and r.path_length is not None]
    failures: dict[str, int] = {}
    for r in records:
        if r.verdict != "success":
            key = r.verdict if r.verdict is not None else "unfinished"
            failures[key] = failures.get(key, 0) + 1
    return BenchSummary(
        runs=len(records),
        successes=len(times),
        failures=failures,
        mean_time=sum(times) / len(times) if times else None,
        min_time=min(times) if times else None,
        max_time=max(times) if times else None,
        mean_path=sum(paths) / len(paths) if paths else None,
    )


def convex_hull_area(points) -> float:
    """Area of the convex hull of 2-D points (pilot motion-area statistic)."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) < 3:
        return 0.0

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for pt in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper: list = []
    for pt in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    hull = lower[:-1] + upper[:-1]
    area = 0.0
    for (x0, y0), (x1, y1) in zip(hull, hull[1:] + hull[:1]):
        area += x0 * y1 - x1 * y0
    return abs(area) / 2.0
