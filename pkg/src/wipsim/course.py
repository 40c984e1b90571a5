"""Benchmark courses, run judging, odometry reconstruction, path metrics.

A run is judged purely from the state trajectory: collision when the
robot center comes within robot_radius + cone_radius of a cone center,
out-of-bounds when the center leaves the course rectangle, a fall when
|theta_R| exceeds 0.5 rad, and success only after the goal line is
crossed and the robot stays upright (|theta_R| < 0.2 rad) for a 2 s
stability window with no failure event. Completion time runs from the
end of the countdown to the goal crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .config import as_float, as_floats, read_pairs
from .errors import ConfigError
from .model import RobotParams, SimState

__all__ = [
    "CourseSpec",
    "Judge",
    "odometry_update",
    "Odometry",
    "path_length",
    "load_course",
    "load_course_pairs",
    "dump_course",
    "three_cone_course",
    "straight_course",
]

FALL_PITCH = 0.5  # rad
FINISH_PITCH = 0.2  # rad
STABILITY_WINDOW = 2.0  # s

TERMINAL = ("success", "collision", "out_of_bounds", "fell", "timeout")


@dataclass(frozen=True)
class CourseSpec:
    name: str
    start: tuple[float, float, float]  # x, y, gamma
    goal_line: float  # world x, m
    cones: tuple[tuple[float, float], ...]
    cone_radius: float = 0.1
    robot_radius: float = 0.2
    bounds: tuple[float, float, float, float] = (-0.5, 4.5, -1.0, 1.0)  # xmin xmax ymin ymax
    countdown: float = 3.0
    timeout: float = 60.0

    def __post_init__(self):
        if self.cone_radius <= 0.0 or self.robot_radius <= 0.0:
            raise ConfigError("radii must be positive")
        xmin, xmax, ymin, ymax = self.bounds
        if not (xmin < xmax and ymin < ymax):
            raise ConfigError("bounds rectangle is empty")
        for cx, cy in self.cones:
            if not (xmin <= cx <= xmax and ymin <= cy <= ymax):
                raise ConfigError(f"cone ({cx}, {cy}) outside bounds")
        if self.countdown < 0.0 or self.timeout <= 0.0:
            raise ConfigError("countdown must be >= 0 and timeout > 0")


def three_cone_course() -> CourseSpec:
    """Default 3-cone drill: 4 m to the goal, cones alternating about the
    centerline so a clean weave is a bit over 5 m of travel."""
    return CourseSpec(
        name="three_cone",
        start=(0.0, 0.0, 0.0),
        goal_line=4.0,
        cones=((1.0, -0.25), (2.0, 0.25), (3.0, -0.25)),
    )


def straight_course() -> CourseSpec:
    """Straight speed course: same 4 m goal, longer run-out past the line."""
    return CourseSpec(name="straight", start=(0.0, 0.0, 0.0), goal_line=4.0, cones=(),
                      bounds=(-0.5, 5.5, -1.0, 1.0))


class Judge:
    """Tracks run status across ticks. Pure function of the trajectory:
    feeding the same states in the same order gives the same verdict."""

    def __init__(self, course: CourseSpec):
        self.course = course
        self.status = "countdown"
        self.verdict: str | None = None
        self.completion_time: float | None = None
        self.t_cross: float | None = None
        self.hit_cone: int | None = None
        self.events: list[tuple[float, str]] = []

    def _fail(self, t: float, reason: str) -> None:
        self.status = reason
        self.verdict = reason
        self.events.append((t, reason))

    def step(self, s: SimState) -> str:
        if self.status in TERMINAL:
            return self.status
        c = self.course

        if abs(s.theta_R) > FALL_PITCH:
            self._fail(s.t, "fell")
            return self.status
        xmin, xmax, ymin, ymax = c.bounds
        if not (xmin <= s.x_world <= xmax and ymin <= s.y_w <= ymax):
            self._fail(s.t, "out_of_bounds")
            return self.status
        limit = c.robot_radius + c.cone_radius
        for i, (cx, cy) in enumerate(c.cones):
            if math.hypot(s.x_world - cx, s.y_w - cy) < limit:
                self.hit_cone = i
                self._fail(s.t, "collision")
                return self.status

        if self.status == "countdown":
            if s.t >= c.countdown:
                self.status = "running"
                self.events.append((s.t, "go"))
            return self.status

        if self.status == "running":
            if s.x_world >= c.goal_line:
                self.t_cross = s.t
                self.completion_time = s.t - c.countdown
                self.status = "finishing"
                self.events.append((s.t, "goal_crossed"))
            elif s.t - c.countdown >= c.timeout:
                self._fail(s.t, "timeout")
            return self.status

        # finishing: hold upright through the stability window
        if abs(s.theta_R) >= FINISH_PITCH:
            self._fail(s.t, "fell")
        elif s.t - self.t_cross >= STABILITY_WINDOW:
            self.status = "success"
            self.verdict = "success"
            self.events.append((s.t, "success"))
        return self.status


def odometry_update(est: tuple[float, float, float], dth_L: float, dth_R: float,
                    p: RobotParams) -> tuple[float, float, float]:
    """Midpoint dead-reckoning from per-tick wheel increments."""
    x, y, gamma = est
    dgamma = (p.r_w / p.r_c) * (dth_R - dth_L)
    ds = p.r_w * (dth_L + dth_R) / 2.0
    g_mid = gamma + 0.5 * dgamma
    return (x + ds * math.cos(g_mid), y + ds * math.sin(g_mid), gamma + dgamma)


class Odometry:
    """Accumulates odometry_update over a run, seeded at the start pose."""

    def __init__(self, p: RobotParams, start: tuple[float, float, float] = (0.0, 0.0, 0.0)):
        self._p = p
        self.estimate = start
        self._last: tuple[float, float] | None = None

    def update(self, theta_wL: float, theta_wR: float) -> tuple[float, float, float]:
        if self._last is not None:
            dl = theta_wL - self._last[0]
            dr = theta_wR - self._last[1]
            self.estimate = odometry_update(self.estimate, dl, dr, self._p)
        self._last = (theta_wL, theta_wR)
        return self.estimate


def path_length(trace) -> float:
    """Sum of Euclidean segment lengths over (x, y[, ...]) points."""
    pts = list(trace)
    if len(pts) < 2:
        raise ConfigError("path_length needs at least 2 points")
    total = 0.0
    for (ax, ay, *_), (bx, by, *_) in zip(pts, pts[1:]):
        total += math.hypot(bx - ax, by - ay)
    return total


def load_course(path) -> CourseSpec:
    return load_course_pairs(read_pairs(path), name=Path(path).stem)


def load_course_pairs(pairs: list[tuple[str, str]], name: str = "course") -> CourseSpec:
    start = (0.0, 0.0, 0.0)
    goal = None
    cones: list[tuple[float, float]] = []
    kwargs: dict = {}
    for key, value in pairs:
        if key == "name":
            name = value
        elif key == "start":
            vals = as_floats(key, value)
            if len(vals) != 3:
                raise ConfigError("start must be x, y, gamma")
            start = tuple(vals)
        elif key == "goal_line":
            goal = as_float(key, value)
        elif key == "cone":
            vals = as_floats(key, value)
            if len(vals) != 2:
                raise ConfigError("cone must be x, y")
            cones.append((vals[0], vals[1]))
        elif key in ("cone_radius", "robot_radius", "countdown", "timeout"):
            kwargs[key] = as_float(key, value)
        elif key == "bounds":
            vals = as_floats(key, value)
            if len(vals) != 4:
                raise ConfigError("bounds must be xmin, xmax, ymin, ymax")
            kwargs["bounds"] = tuple(vals)
        else:
            raise ConfigError(f"unknown course key {key!r}")
    if goal is None:
        raise ConfigError("course file must define goal_line")
    return CourseSpec(name=name, start=start, goal_line=goal, cones=tuple(cones), **kwargs)


def dump_course(c: CourseSpec) -> str:
    lines = [
        f"name = {c.name}",
        "start = " + ",".join(repr(v) for v in c.start),
        f"goal_line = {c.goal_line!r}",
    ]
    lines += ["cone = " + ",".join(repr(v) for v in cone) for cone in c.cones]
    lines += [
        f"cone_radius = {c.cone_radius!r}",
        f"robot_radius = {c.robot_radius!r}",
        "bounds = " + ",".join(repr(v) for v in c.bounds),
        f"countdown = {c.countdown!r}",
        f"timeout = {c.timeout!r}",
    ]
    return "\n".join(lines) + "\n"
