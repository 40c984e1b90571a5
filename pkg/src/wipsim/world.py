"""The deterministic tick loop.

One World owns all mutable simulation state. Each tick latches the most
recent pilot input (hold-last-value across gaps, with a safety ramp to
zero once the input is more than stale_timeout old), evaluates the
active mapping into a DesiredState, runs the control laws (optionally
subsampled by controller_divisor with zero-order hold between control
ticks), saturates, integrates the plant one RK4 step, and updates the
judge and odometry. The resulting state stream is a pure function of
(params, configs, input sequence): replaying the same inputs reproduces
every float bit for bit.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .control import (
    FLAG_GAINS_CHANGED,
    FLAG_HEIGHT_CLAMP,
    FLAG_STALE,
    DesiredState,
    compose_command,
    height_control,
    stabilize,
    yaw_control,
)
from .course import CourseSpec, Judge, Odometry
from .errors import ConfigError
from .mapping import DesiredTracker, MappingConfig, PilotInput, virtual_spring
from .model import ActuatorCommand, RobotParams, SimState, nominal_hip_angle, step_rk4
from .synthesis import GainSet

__all__ = ["WorldOptions", "Frame", "World"]


@dataclass(frozen=True)
class WorldOptions:
    rate_hz: float = 1000.0
    controller_divisor: int = 1
    wheel_friction: float = 0.0  # N s/m, off by default
    command_delay_ticks: int = 0  # off by default
    stale_timeout: float = 0.2  # s without fresh input before the safety ramp
    stale_ramp: float = 0.5  # s to ramp desired rates to zero
    hip_height: float = 0.28  # m, nominal CoM height

    def __post_init__(self):
        if not 200.0 <= self.rate_hz <= 10000.0:
            raise ConfigError("tick rate must be in [200, 10000] Hz")
        if self.controller_divisor < 1:
            raise ConfigError("controller_divisor must be >= 1")
        if self.command_delay_ticks < 0 or self.wheel_friction < 0.0:
            raise ConfigError("friction and delay options must be nonnegative")


@dataclass(frozen=True)
class Frame:
    """One logged tick."""

    tick: int
    t: float
    seq: int
    p_x: float
    gamma_h: float
    state: SimState
    desired: DesiredState
    command: ActuatorCommand
    flags: int
    odometry: tuple[float, float, float]
    spring_force: float


class World:
    def __init__(self, params: RobotParams, gains: GainSet, mapping_cfg: MappingConfig,
                 course: CourseSpec | None = None, options: WorldOptions = WorldOptions()):
        self.params = params
        self.gains = gains
        self.options = options
        self.dt = 1.0 / options.rate_hz
        self.course = course
        start = course.start if course else (0.0, 0.0, 0.0)
        theta_1 = nominal_hip_angle(params, options.hip_height)
        self.state = SimState(x_world=start[0], y_w=start[1], gamma=start[2], theta_1=theta_1)
        self.judge = Judge(course) if course else None
        self.odometry = Odometry(params, start)
        self.odometry.update(self.state.theta_wL, self.state.theta_wR)  # seed at initial angles
        self.mapping_cfg = mapping_cfg
        self.tracker = DesiredTracker(mapping_cfg, params, self.dt, theta_1_des=theta_1,
                                      gamma_start=start[2], stale_ramp_s=options.stale_ramp)
        self.tick_count = 0
        self._latched = PilotInput()
        self._last_seq = -1
        self._last_input_t: float | None = None
        self._was_stale = False
        self._held_u = 0.0
        self._held_yaw = 0.0
        self._held_hip = 0.0
        self._held_flags = 0
        self._delay_queue: deque[ActuatorCommand] = deque(
            [ActuatorCommand()] * options.command_delay_ticks)
        self.gains_changed = False
        self.pending_events: list[dict] = []

    # -- configuration messages, applied between ticks only --------------

    def apply_mapping(self, cfg: MappingConfig) -> None:
        self.mapping_cfg = cfg
        self.tracker.replace_config(cfg)
        self._mark_gains_changed("mapping updated")

    def apply_gains(self, gains: GainSet) -> None:
        self.gains = gains
        self._mark_gains_changed("gains updated")

    def _mark_gains_changed(self, what: str) -> None:
        if self.judge is not None and self.judge.status not in ("countdown",):
            self.gains_changed = True
        self.pending_events.append({"name": "config_applied", "detail": what,
                                    "t": self.state.t})

    # -- main loop --------------------------------------------------------

    def offer_input(self, inp: PilotInput) -> bool:
        """Latch an input message if its sequence number advances."""
        if inp.seq <= self._last_seq:
            return False
        self._latched = inp.sanitized()
        self._last_seq = inp.seq
        self._last_input_t = self.state.t
        return True

    @property
    def last_seq(self) -> int:
        return self._last_seq

    def input_stale(self) -> bool:
        if self._last_input_t is None:
            return False  # never had input: desired stays zero anyway
        return self.state.t - self._last_input_t > self.options.stale_timeout

    def tick(self, inp: PilotInput | None = None) -> Frame:
        if inp is not None:
            self.offer_input(inp)

        stale = self.input_stale()
        if stale and not self._was_stale:
            self.pending_events.append({"name": "input_stale", "t": self.state.t})
        self._was_stale = stale

        in_countdown = self.judge is not None and self.judge.status == "countdown"
        pilot = PilotInput(seq=self._latched.seq, t=self._latched.t) if in_countdown \
            else self._latched
        desired = self.tracker.update(pilot, stale=stale)

        s = self.state
        if self.tick_count % self.options.controller_divisor == 0:
            q = s.planar()
            self._held_u = stabilize(desired, q, self.gains.k_effective())
            self._held_yaw = yaw_control(desired.gamma_des, desired.gammadot_des,
                                         s.gamma, s.gammadot, self.gains)
            self._held_hip, height_clamped = height_control(
                desired.theta_1_des, s.theta_1, s.thetadot_1, self.params, self.gains)
            self._held_flags = FLAG_HEIGHT_CLAMP if height_clamped else 0

        half_track = self.params.r_c / (2.0 * self.params.r_w)
        omega_L = s.xdot_w / self.params.r_w - half_track * s.gammadot
        omega_R = s.xdot_w / self.params.r_w + half_track * s.gammadot
        cmd, cflags = compose_command(self._held_u, self._held_yaw, self._held_hip,
                                      self.params, omega_L, omega_R)

        if self.options.command_delay_ticks > 0:
            self._delay_queue.append(cmd)
            effective = self._delay_queue.popleft()
        else:
            effective = cmd

        self.state = step_rk4(s, effective, self.params, self.dt,
                              self.options.wheel_friction)
        odo = self.odometry.update(self.state.theta_wL, self.state.theta_wR)
        if self.judge is not None:
            before = self.judge.status
            after = self.judge.step(self.state)
            if after != before:
                self.pending_events.append({"name": "run_status", "detail": after,
                                            "t": self.state.t})
        self.tick_count += 1

        flags = cflags.bits() | self._held_flags
        if stale:
            flags |= FLAG_STALE
        if self.gains_changed:
            flags |= FLAG_GAINS_CHANGED
        return Frame(
            tick=self.tick_count,
            t=self.state.t,
            seq=self._latched.seq,
            p_x=self._latched.p_x,
            gamma_h=self._latched.gamma_h,
            state=self.state,
            desired=desired,
            command=cmd,
            flags=flags,
            odometry=odo,
            spring_force=virtual_spring(self._latched.p_x, self.mapping_cfg.k_spring),
        )

    def drain_events(self) -> list[dict]:
        events, self.pending_events = self.pending_events, []
        return events
