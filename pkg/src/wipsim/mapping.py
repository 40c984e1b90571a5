"""Pilot lean/twist to desired robot motion.

Two mappings are supported. The velocity mapping sends CoM lean p_x
through a four-section piecewise-linear curve (deadband, two slopes,
saturation) to a desired wheel velocity, and body twist gamma_h through
a second curve to a desired yaw rate. The acceleration mapping sends
lean (small-angle identified with pilot tilt) to a desired body tilt,
which converts to desired translational motion through the plant
relation

    x_des'' = -((m_o L^2 + I_o)/(m_o L)) th_des'' + g th_des

with the tilt derivatives obtained by low-pass-filtered differencing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .control import DesiredState
from .errors import ConfigError, DomainError
from .model import RobotParams

__all__ = [
    "PiecewiseMapConfig",
    "AccelMapConfig",
    "MappingConfig",
    "PilotInput",
    "piecewise_eval",
    "map_velocity",
    "map_acceleration",
    "virtual_spring",
    "sensitivity",
    "TiltToMotion",
    "accel_to_desired",
    "default_mapping",
    "speed_run_mapping",
    "DesiredTracker",
]

SPRING_FORCE_LIMIT = 100.0  # actuator capability, N
MAX_COMMANDED_TILT = 0.3  # hard safety cap on |theta_R_des|, rad

# sanitization bounds on raw pilot input
PILOT_LEAN_LIMIT = 0.5  # m
PILOT_TWIST_LIMIT = math.pi  # rad


@dataclass(frozen=True)
class PiecewiseMapConfig:
    """Deadband / two-slope / saturation curve. The continuity constant
    c_swp and the output cap max_out are derived, never stored."""

    deadband: float
    swp: float
    max_in: float
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if not (0.0 <= self.deadband < self.swp < self.max_in):
            raise ConfigError(
                f"need 0 <= deadband < swp < max_in, got {self.deadband}, {self.swp}, {self.max_in}")
        if self.alpha1 < 0.0 or self.alpha2 < 0.0:
            raise ConfigError("section slopes must be nonnegative")

    @property
    def c_swp(self) -> float:
        return self.alpha1 * (self.swp - self.deadband)

    @property
    def max_out(self) -> float:
        return self.alpha2 * (self.max_in - self.swp) + self.c_swp


@dataclass(frozen=True)
class AccelMapConfig:
    """Single-slope deadbanded tilt map, capped at max_tilt."""

    deadband: float
    slope: float
    max_tilt: float

    def __post_init__(self):
        if self.deadband < 0.0 or self.slope < 0.0:
            raise ConfigError("acceleration map deadband and slope must be nonnegative")
        if not 0.0 < self.max_tilt <= MAX_COMMANDED_TILT:
            raise ConfigError(f"max commanded tilt must be in (0, {MAX_COMMANDED_TILT}] rad")


@dataclass(frozen=True)
class MappingConfig:
    mode: str  # "velocity" | "acceleration"
    vel: PiecewiseMapConfig
    yaw: PiecewiseMapConfig
    acc: AccelMapConfig
    theta_H_max: float  # pilot max pitch, rad
    k_spring: float = 200.0  # N/m
    accel_filter_cutoff_hz: float = 20.0

    def __post_init__(self):
        if self.mode not in ("velocity", "acceleration"):
            raise ConfigError(f"unknown mapping mode {self.mode!r}")
        if self.theta_H_max <= 0.0:
            raise ConfigError("theta_H_max must be positive")
        if self.k_spring < 0.0:
            raise ConfigError("k_spring must be nonnegative")
        if self.accel_filter_cutoff_hz <= 0.0:
            raise ConfigError("derivative filter cutoff must be positive")


@dataclass(frozen=True)
class PilotInput:
    """One sampled pilot frame. seq must be strictly increasing per session."""

    p_x: float = 0.0  # CoM lean, m
    gamma_h: float = 0.0  # body twist, rad
    t: float = 0.0
    seq: int = 0

    def sanitized(self) -> "PilotInput":
        if not (math.isfinite(self.p_x) and math.isfinite(self.gamma_h)):
            raise DomainError("nonfinite pilot input")
        return PilotInput(
            p_x=min(max(self.p_x, -PILOT_LEAN_LIMIT), PILOT_LEAN_LIMIT),
            gamma_h=min(max(self.gamma_h, -PILOT_TWIST_LIMIT), PILOT_TWIST_LIMIT),
            t=self.t,
            seq=self.seq,
        )


def default_mapping(mode: str = "velocity") -> MappingConfig:
    """Shipped starting-point presets, tunable at runtime."""
    return MappingConfig(
        mode=mode,
        vel=PiecewiseMapConfig(deadband=0.01, swp=0.05, max_in=0.15, alpha1=2.0, alpha2=10.0),
        yaw=PiecewiseMapConfig(deadband=0.03, swp=0.15, max_in=0.5, alpha1=1.5, alpha2=4.0),
        acc=AccelMapConfig(deadband=0.02, slope=0.0935, max_tilt=0.02618),
        theta_H_max=0.3,
        k_spring=200.0,
    )


def speed_run_mapping() -> MappingConfig:
    """Straight-line speed-course preset: full lean maps past the hardware
    top speed, so the desired velocity rides the 1.4 m/s cap."""
    cfg = default_mapping()
    return MappingConfig(
        mode="velocity",
        vel=PiecewiseMapConfig(deadband=0.01, swp=0.05, max_in=0.15, alpha1=2.0, alpha2=14.2),
        yaw=cfg.yaw, acc=cfg.acc, theta_H_max=cfg.theta_H_max, k_spring=cfg.k_spring,
    )


def piecewise_eval(x: float, cfg: PiecewiseMapConfig) -> float:
    """Odd, continuous, monotone four-section curve."""
    mag = abs(x)
    sgn = -1.0 if x < 0.0 else 1.0
    if mag < cfg.deadband:
        return 0.0
    if mag < cfg.swp:
        return sgn * cfg.alpha1 * (mag - cfg.deadband)
    if mag < cfg.max_in:
        return sgn * (cfg.alpha2 * (mag - cfg.swp) + cfg.c_swp)
    return sgn * cfg.max_out


def map_velocity(inp: PilotInput, cfg: MappingConfig, v_limit: float) -> tuple[float, float]:
    """Desired (wheel velocity, yaw rate); velocity additionally clamped
    to the hardware top speed."""
    xdot = piecewise_eval(inp.p_x, cfg.vel)
    xdot = min(max(xdot, -v_limit), v_limit)
    gammadot = piecewise_eval(inp.gamma_h, cfg.yaw)
    return xdot, gammadot


def map_acceleration(inp: PilotInput, cfg: MappingConfig) -> float:
    """Desired body tilt from pilot lean (p_x ~ theta_H under small angles)."""
    theta_h = inp.p_x
    mag = abs(theta_h)
    sgn = -1.0 if theta_h < 0.0 else 1.0
    if mag < cfg.acc.deadband:
        return 0.0
    if mag >= cfg.theta_H_max:
        return sgn * cfg.acc.max_tilt
    return sgn * min(cfg.acc.slope * (mag - cfg.acc.deadband), cfg.acc.max_tilt)


def virtual_spring(p_x: float, k_spring: float) -> float:
    """Restoring force rendered back to the pilot, display only."""
    if k_spring < 0.0:
        raise DomainError("spring stiffness must be nonnegative")
    return min(max(-k_spring * p_x, -SPRING_FORCE_LIMIT), SPRING_FORCE_LIMIT)


def sensitivity(cfg: MappingConfig) -> float:
    """Velocity-mapping control sensitivity: top mapped speed per radian
    of pilot pitch (computed from the mapping, not the hardware clamp)."""
    if cfg.theta_H_max <= 0.0:
        raise DomainError("theta_H_max must be positive")
    return cfg.vel.max_out / cfg.theta_H_max


class _LowPass:
    """First-order low-pass, state seeded by the first input sample."""

    def __init__(self, cutoff_hz: float, dt: float):
        tau = 1.0 / (2.0 * math.pi * cutoff_hz)
        self._alpha = dt / (tau + dt)
        self._y: float | None = None

    def step(self, u: float) -> float:
        if self._y is None:
            self._y = u
        else:
            self._y += self._alpha * (u - self._y)
        return self._y


class TiltToMotion:
    """Streaming converter from desired tilt to desired planar motion.

    Tilt derivatives come from first differences with a low-pass after
    each difference stage; the filters seed on their first sample so a
    constant stream yields x'' = g * tilt exactly from the first tick.
    The velocity integrator is clamped to +/-v_limit with no stored
    surplus, and position integrates the clamped velocity, so releasing
    after saturation resumes from the achieved position.
    """

    def __init__(self, p: RobotParams, dt: float, cutoff_hz: float = 20.0,
                 v_limit: float | None = None):
        if dt <= 0.0:
            raise ConfigError("dt must be positive")
        self._ratio = (p.m_o * p.L**2 + p.I_o) / (p.m_o * p.L)
        self._g = p.g
        self._dt = dt
        self._v_limit = p.v_max_hw if v_limit is None else v_limit
        self._lp1 = _LowPass(cutoff_hz, dt)
        self._lp2 = _LowPass(cutoff_hz, dt)
        self._theta_prev: float | None = None
        self._d1_prev: float | None = None
        self._xdd_prev = 0.0
        self.thetadot = 0.0
        self.xddot = 0.0
        self.xdot = 0.0
        self.x = 0.0

    def step(self, theta_des: float) -> tuple[float, float, float, float]:
        """Feed one tilt sample; returns (x'', x', x, tilt')."""
        if self._theta_prev is None:
            # single sample: no derivative information yet
            self._theta_prev = theta_des
            d1 = 0.0
            d2 = 0.0
        else:
            d1 = self._lp1.step((theta_des - self._theta_prev) / self._dt)
            self._theta_prev = theta_des
            if self._d1_prev is None:
                # first real first-derivative sample: second stage not live yet
                d2 = 0.0
            else:
                d2 = self._lp2.step((d1 - self._d1_prev) / self._dt)
            self._d1_prev = d1

        self.thetadot = d1
        self.xddot = -self._ratio * d2 + self._g * theta_des
        v_prev = self.xdot
        v = self.xdot + 0.5 * (self._xdd_prev + self.xddot) * self._dt
        self.xdot = min(max(v, -self._v_limit), self._v_limit)
        self.x += 0.5 * (v_prev + self.xdot) * self._dt
        self._xdd_prev = self.xddot
        return self.xddot, self.xdot, self.x, self.thetadot

    def override_velocity(self, v: float) -> None:
        """Force the velocity integrator (safety ramps); keeps position consistent."""
        self.xdot = min(max(v, -self._v_limit), self._v_limit)


def accel_to_desired(tilt_stream, p: RobotParams, dt: float, cutoff_hz: float = 20.0,
                     v_limit: float | None = None):
    """Batch form of TiltToMotion over a uniformly sampled tilt stream.

    Returns lists (xddot_des, xdot_des, x_des, thetadot_des), one entry
    per input sample.
    """
    conv = TiltToMotion(p, dt, cutoff_hz, v_limit)
    xdd, xd, xs, thd = [], [], [], []
    for theta in tilt_stream:
        a, v, x, w = conv.step(theta)
        xdd.append(a)
        xd.append(v)
        xs.append(x)
        thd.append(w)
    return xdd, xd, xs, thd


class DesiredTracker:
    """Owns the desired-state integrators for one session.

    Configuration changes arrive between ticks (the tick loop swaps the
    tracker's config, never mid-tick). When the pilot input goes stale
    the commanded rates ramp linearly to zero over stale_ramp_s and the
    position targets freeze where the ramp leaves them; a fresh input
    resumes from the ramped-down values, not the pre-stale ones.
    """

    def __init__(self, cfg: MappingConfig, p: RobotParams, dt: float,
                 theta_1_des: float, gamma_start: float = 0.0,
                 stale_ramp_s: float = 0.5):
        self.cfg = cfg
        self._p = p
        self._dt = dt
        self._ramp_s = stale_ramp_s
        self.theta_1_des = theta_1_des
        self.x_des = 0.0
        self.gamma_des = gamma_start
        self._xdot_prev = 0.0
        self._gammadot_prev = 0.0
        self._tilt = TiltToMotion(p, dt, cfg.accel_filter_cutoff_hz)
        self._last_tilt = 0.0
        self._stale_ticks = 0
        self._stale_latch: tuple[float, float, float] | None = None  # (xdot, gammadot, tilt)

    def replace_config(self, cfg: MappingConfig) -> None:
        """Swap mapping parameters, preserving position targets. A mode or
        filter change restarts the tilt chain from the current velocity."""
        mode_changed = cfg.mode != self.cfg.mode
        cutoff_changed = cfg.accel_filter_cutoff_hz != self.cfg.accel_filter_cutoff_hz
        self.cfg = cfg
        if mode_changed or cutoff_changed:
            xdot, x = self._tilt.xdot, self._tilt.x
            self._tilt = TiltToMotion(self._p, self._dt, cfg.accel_filter_cutoff_hz)
            self._tilt.xdot = self._xdot_prev if cfg.mode == "acceleration" else xdot
            self._tilt.x = self.x_des if cfg.mode == "acceleration" else x

    def update(self, inp: PilotInput, stale: bool = False) -> DesiredState:
        if stale:
            return self._update_stale()
        self._stale_latch = None
        self._stale_ticks = 0
        if self.cfg.mode == "velocity":
            xdot, gammadot = map_velocity(inp, self.cfg, self._p.v_max_hw)
            theta_des = 0.0
            thetadot_des = 0.0
            self.x_des += 0.5 * (self._xdot_prev + xdot) * self._dt
        else:
            theta_des = map_acceleration(inp, self.cfg)
            _, xdot, x, thetadot_des = self._tilt.step(theta_des)
            self.x_des = x
            gammadot = piecewise_eval(inp.gamma_h, self.cfg.yaw)
        self.gamma_des += 0.5 * (self._gammadot_prev + gammadot) * self._dt
        self._xdot_prev = xdot
        self._gammadot_prev = gammadot
        self._last_tilt = theta_des
        return DesiredState(
            x_des=self.x_des, xdot_des=xdot,
            theta_R_des=theta_des, thetadot_R_des=thetadot_des,
            gamma_des=self.gamma_des, gammadot_des=gammadot,
            theta_1_des=self.theta_1_des,
        )

    def _update_stale(self) -> DesiredState:
        if self._stale_latch is None:
            self._stale_latch = (self._xdot_prev, self._gammadot_prev, self._last_tilt)
            self._stale_ticks = 0
        self._stale_ticks += 1
        frac = max(0.0, 1.0 - self._stale_ticks * self._dt / self._ramp_s)
        v0, g0, th0 = self._stale_latch
        xdot = v0 * frac
        gammadot = g0 * frac
        theta_des = th0 * frac
        self.x_des += 0.5 * (self._xdot_prev + xdot) * self._dt
        self.gamma_des += 0.5 * (self._gammadot_prev + gammadot) * self._dt
        self._xdot_prev = xdot
        self._gammadot_prev = gammadot
        if self.cfg.mode == "acceleration":
            # keep the tilt chain consistent so recovery resumes smoothly
            self._tilt.override_velocity(xdot)
            self._tilt.x = self.x_des
            self._tilt._theta_prev = theta_des
        return DesiredState(
            x_des=self.x_des, xdot_des=xdot,
            theta_R_des=theta_des, thetadot_R_des=0.0,
            gamma_des=self.gamma_des, gammadot_des=gammadot,
            theta_1_des=self.theta_1_des,
        )
