"""Deterministic scripted pilots, the headless stand-in for a human.

Each pilot maps time to a PilotInput and knows the course countdown so
it stays neutral until the run starts. The weave profile's constants
were tuned once against the default three-cone course and are frozen
here as a regression anchor.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .errors import ConfigError
from .mapping import PilotInput

__all__ = ["scripted_pilot", "StraightlinePilot", "WeavePilot", "StepPilot", "CustomPilot"]


@dataclass(frozen=True)
class StraightlinePilot:
    """Lean to max after the countdown, hold, release before the goal.

    The ramp is cosine-shaped so the commanded velocity approaches its
    cap with tapering acceleration; a hard step would demand a velocity
    overshoot past the wheel-speed ceiling while the body unwinds its
    lean.
    """

    countdown: float = 3.0
    lean_max: float = 0.15
    ramp_s: float = 1.0
    hold_s: float = 2.6  # lean time at max before release

    def input_at(self, t: float, seq: int) -> PilotInput:
        rel = t - self.countdown
        if rel < 0.0:
            lean = 0.0
        elif rel < self.ramp_s:
            lean = self.lean_max * 0.5 * (1.0 - math.cos(math.pi * rel / self.ramp_s))
        elif rel < self.ramp_s + self.hold_s:
            lean = self.lean_max
        else:
            lean = 0.0
        return PilotInput(p_x=lean, gamma_h=0.0, t=t, seq=seq)


@dataclass(frozen=True)
class WeavePilot:
    """Phased lean plus twist sinusoids that clear the default cones.

    The twist starts twist_delay after the countdown so its spatial phase
    lines up with the cone spacing once the robot is up to speed. The
    first turn is a time-compressed lobe carrying half the angular
    impulse of the following ones: a slalom entered from the centerline
    needs a half-sized entry swing before the symmetric weave.
    """

    countdown: float = 3.0
    lean: float = 0.10
    ramp_s: float = 0.6
    twist_amp: float = 0.48
    period_s: float = 4.3
    twist_delay: float = 1.1
    drive_s: float = 9.35  # lean release time after countdown

    def input_at(self, t: float, seq: int) -> PilotInput:
        rel = t - self.countdown
        if rel < 0.0:
            return PilotInput(t=t, seq=seq)
        if rel < self.ramp_s:
            lean = self.lean * rel / self.ramp_s
        elif rel < self.drive_s:
            lean = self.lean
        else:
            lean = 0.0
        twist = 0.0
        phase = rel - self.twist_delay
        omega = 2.0 * math.pi / self.period_s
        quarter = 0.25 * self.period_s
        if 0.0 <= phase and rel < self.drive_s:
            if phase < quarter:
                twist = self.twist_amp * math.sin(2.0 * omega * phase)
            else:
                twist = self.twist_amp * math.sin(omega * (phase + quarter))
        return PilotInput(p_x=lean, gamma_h=twist, t=t, seq=seq)


@dataclass(frozen=True)
class StepPilot:
    """Instantaneous lean step; exposes the backward dip of the wheel."""

    countdown: float = 0.0
    lean: float = 0.15

    def input_at(self, t: float, seq: int) -> PilotInput:
        lean = self.lean if t >= self.countdown else 0.0
        return PilotInput(p_x=lean, gamma_h=0.0, t=t, seq=seq)


class CustomPilot:
    """Piecewise-linear interpolation through (t, p_x, gamma_h) waypoints."""

    def __init__(self, waypoints: list[tuple[float, float, float]]):
        if len(waypoints) < 1:
            raise ConfigError("custom pilot needs at least one waypoint")
        pts = sorted(waypoints)
        self._ts = [w[0] for w in pts]
        self._px = [w[1] for w in pts]
        self._gh = [w[2] for w in pts]

    def input_at(self, t: float, seq: int) -> PilotInput:
        i = bisect_right(self._ts, t)
        if i == 0:
            px, gh = 0.0, 0.0
        elif i == len(self._ts):
            px, gh = self._px[-1], self._gh[-1]
        else:
            t0, t1 = self._ts[i - 1], self._ts[i]
            f = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            px = self._px[i - 1] + f * (self._px[i] - self._px[i - 1])
            gh = self._gh[i - 1] + f * (self._gh[i] - self._gh[i - 1])
        return PilotInput(p_x=px, gamma_h=gh, t=t, seq=seq)


def scripted_pilot(profile: str, countdown: float = 3.0, **kwargs):
    """Factory by profile name: straightline | weave | step | custom."""
    if profile == "straightline":
        return StraightlinePilot(countdown=countdown, **kwargs)
    if profile == "weave":
        return WeavePilot(countdown=countdown, **kwargs)
    if profile == "step":
        return StepPilot(countdown=countdown, **kwargs)
    if profile == "custom":
        return CustomPilot(**kwargs)
    raise ConfigError(f"unknown pilot profile {profile!r}")
