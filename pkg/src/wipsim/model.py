"""Wheeled-inverted-pendulum plant: parameters, state, and dynamics.

The planar subsystem is the classic two-equation WIP model,

    (m_o + m_w + I_w/r_w^2) x''  + m_o L sin(th) th'^2  - m_o L cos(th) th'' = u
    (m_o L^2 + I_o)        th''  - m_o L cos(th) x''    - m_o g L sin(th)    = 0

with u the net axial ground force produced by the wheel torques,
u = (tau_L + tau_R) / r_w.  Pitch th is measured from vertical with the
body CoM at (x - L sin th, L cos th), so the upright is th = 0 and the
pendulum is unstable there.

Yaw, leg height, world pose and wheel angles are decoupled bookkeeping:

    I_z   gamma''  = (r_c / (2 r_w)) (tau_R - tau_L)
    I_leg th_1''   = tau_hip - J_c(th_1) m_o g,  J_c = -2 l_leg sin(th_1)
    x_world' = x' cos(gamma),   y' = x' sin(gamma)
    th_wL'   = x'/r_w - (r_c / (2 r_w)) gamma'
    th_wR'   = x'/r_w + (r_c / (2 r_w)) gamma'

Everything here is a pure function of its inputs; integration is
fixed-step RK4 so identical inputs give bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DomainError

MAX_STEP_S = 0.005

__all__ = [
    "RobotParams",
    "SimState",
    "ActuatorCommand",
    "default_params",
    "planar_derivative",
    "full_derivative",
    "step_rk4",
    "mechanical_energy",
    "nominal_hip_angle",
]


@dataclass(frozen=True)
class RobotParams:
    """Physical constants of the plant, SI units throughout.

    m_w and I_w lump both wheels together; the per-wheel split only
    shows up in the yaw moment arm and the encoder bookkeeping.
    """

    m_o: float  # body mass, kg
    m_w: float  # combined wheel mass, kg
    I_w: float  # combined wheel spin inertia, kg m^2
    I_o: float  # body pitch inertia about CoM, kg m^2
    L: float  # wheel axle to body CoM distance, m
    r_w: float  # wheel radius, m
    r_c: float  # wheel track, m
    I_z: float  # yaw inertia, kg m^2
    I_leg: float  # leg link inertia about hip, kg m^2
    l_leg: float  # leg link length, m
    g: float  # gravitational acceleration, m/s^2
    tau_max: float  # per-motor torque limit, N m
    omega_max: float  # per-motor speed limit, rad/s
    v_max_hw: float  # hardware top speed, m/s

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"robot parameter {name} must be finite and > 0, got {value!r}")
        if self.mass_matrix_det() <= 0.0:
            raise ConfigError("singular planar mass matrix: (m_o+m_w+I_w/r_w^2)(m_o L^2+I_o) must exceed (m_o L)^2")
        if self.v_max_hw > self.omega_max * self.r_w + 1e-12:
            raise ConfigError("v_max_hw exceeds omega_max * r_w")

    def mass_matrix_det(self) -> float:
        m_total = self.m_o + self.m_w + self.I_w / self.r_w**2
        return m_total * (self.m_o * self.L**2 + self.I_o) - (self.m_o * self.L) ** 2


def default_params() -> RobotParams:
    """Default parameter set: 6.8 kg total, ~0.28 m CoM height, 1.4 m/s top speed."""
    return RobotParams(
        m_o=6.0,
        m_w=0.8,
        I_w=0.001,
        I_o=0.12,
        L=0.25,
        r_w=0.05,
        r_c=0.30,
        I_z=0.05,
        I_leg=0.02,
        l_leg=0.175,
        g=9.81,
        tau_max=24.0,
        omega_max=30.0,
        v_max_hw=1.4,
    )


def nominal_hip_angle(p: RobotParams, hip_height: float = 0.28) -> float:
    """Hip link angle holding the foot drop 2 l_leg cos(th_1) at hip_height."""
    ratio = hip_height / (2.0 * p.l_leg)
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"hip height {hip_height} unreachable with l_leg={p.l_leg}")
    return math.acos(ratio)


@dataclass(frozen=True)
class SimState:
    """Full simulated state. x_w is wheel travel (arc length); the world
    pose (x_world, y_w, gamma) tracks the curved path."""

    x_w: float = 0.0
    theta_R: float = 0.0
    xdot_w: float = 0.0
    thetadot_R: float = 0.0
    y_w: float = 0.0
    x_world: float = 0.0
    gamma: float = 0.0
    gammadot: float = 0.0
    theta_1: float = 0.6435011087932844  # acos(0.8), the 0.28 m nominal height
    thetadot_1: float = 0.0
    theta_wL: float = 0.0
    theta_wR: float = 0.0
    t: float = 0.0

    def planar(self) -> tuple[float, float, float, float]:
        return (self.x_w, self.theta_R, self.xdot_w, self.thetadot_R)

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.x_w, self.theta_R, self.xdot_w, self.thetadot_R,
            self.y_w, self.x_world, self.gamma, self.gammadot,
            self.theta_1, self.thetadot_1, self.theta_wL, self.theta_wR, self.t,
        )


@dataclass(frozen=True)
class ActuatorCommand:
    """Per-motor torques, N m. Saturation happens upstream in compose_command."""

    tau_L: float = 0.0
    tau_R: float = 0.0
    tau_hip: float = 0.0


def _planar_accels(theta: float, thetadot: float, u: float, p: RobotParams) -> tuple[float, float]:
    """Solve the two coupled planar equations for (x'', th'')."""
    ct = math.cos(theta)
    st = math.sin(theta)
    m_total = p.m_o + p.m_w + p.I_w / (p.r_w * p.r_w)
    d_pitch = p.m_o * p.L * p.L + p.I_o
    c = p.m_o * p.L
    grav = p.m_o * p.g * p.L * st
    den = m_total * d_pitch - (c * ct) ** 2
    xdd = (d_pitch * (u - c * st * thetadot * thetadot) + (c * ct) * grav) / den
    thdd = (c * ct * xdd + grav) / d_pitch
    return xdd, thdd


def planar_derivative(q, u: float, p: RobotParams) -> tuple[float, float, float, float]:
    """Time derivative of the planar state [x_w, theta_R, xdot_w, thetadot_R]."""
    x, theta, xdot, thetadot = q
    if not all(math.isfinite(v) for v in (x, theta, xdot, thetadot, u)):
        raise DomainError("nonfinite planar state or input")
    xdd, thdd = _planar_accels(theta, thetadot, u, p)
    return (xdot, thetadot, xdd, thdd)


def _deriv12(y: tuple, c: ActuatorCommand, p: RobotParams,
             wheel_friction: float) -> tuple[float, ...]:
    """Derivative of the packed 12-component state (tick-loop hot path)."""
    (x_w, theta_R, xdot_w, thetadot_R, y_w, x_world, gamma, gammadot,
     theta_1, thetadot_1, _theta_wL, _theta_wR) = y
    u = (c.tau_L + c.tau_R) / p.r_w - wheel_friction * xdot_w
    xdd, thdd = _planar_accels(theta_R, thetadot_R, u, p)
    gammadd = (p.r_c / (2.0 * p.r_w)) * (c.tau_R - c.tau_L) / p.I_z
    g_load = -2.0 * p.l_leg * math.sin(theta_1) * p.m_o * p.g
    theta1dd = (c.tau_hip - g_load) / p.I_leg
    half_track = p.r_c / (2.0 * p.r_w)
    return (
        xdot_w,
        thetadot_R,
        xdd,
        thdd,
        xdot_w * math.sin(gamma),
        xdot_w * math.cos(gamma),
        gammadot,
        gammadd,
        thetadot_1,
        theta1dd,
        xdot_w / p.r_w - half_track * gammadot,
        xdot_w / p.r_w + half_track * gammadot,
    )


def full_derivative(s: SimState, c: ActuatorCommand, p: RobotParams,
                    wheel_friction: float = 0.0) -> tuple[float, ...]:
    """Time derivative of the full 12-component state (excluding t).

    wheel_friction adds an optional viscous axial drag -b*xdot_w to the
    ground force; it is off (0.0) by default and exists only to reproduce
    idle oscillation phenomena qualitatively.
    """
    vals = (s.x_w, s.theta_R, s.xdot_w, s.thetadot_R, s.y_w, s.x_world, s.gamma,
            s.gammadot, s.theta_1, s.thetadot_1, c.tau_L, c.tau_R, c.tau_hip)
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("nonfinite state or command")
    return _deriv12(s.as_tuple()[:12], c, p, wheel_friction)


_N = 12  # integrated components; t advances separately


def step_rk4(s: SimState, c: ActuatorCommand, p: RobotParams, dt: float,
             wheel_friction: float = 0.0) -> SimState:
    """Classic fixed-step RK4 over one tick. Torques are held constant
    across the step (zero-order hold)."""
    if not (0.0 < dt <= MAX_STEP_S):
        raise ConfigError(f"dt must be in (0, {MAX_STEP_S}] s, got {dt}")
    y0 = s.as_tuple()[:_N]
    if not all(math.isfinite(v) for v in y0) or not all(
            math.isfinite(v) for v in (c.tau_L, c.tau_R, c.tau_hip)):
        raise DomainError("nonfinite state or command")

    k1 = _deriv12(y0, c, p, wheel_friction)
    k2 = _deriv12(tuple(y0[i] + 0.5 * dt * k1[i] for i in range(_N)), c, p, wheel_friction)
    k3 = _deriv12(tuple(y0[i] + 0.5 * dt * k2[i] for i in range(_N)), c, p, wheel_friction)
    k4 = _deriv12(tuple(y0[i] + dt * k3[i] for i in range(_N)), c, p, wheel_friction)
    y1 = tuple(
        y0[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(_N)
    )
    return SimState(
        x_w=y1[0], theta_R=y1[1], xdot_w=y1[2], thetadot_R=y1[3],
        y_w=y1[4], x_world=y1[5], gamma=y1[6], gammadot=y1[7],
        theta_1=y1[8], thetadot_1=y1[9], theta_wL=y1[10], theta_wR=y1[11],
        t=s.t + dt,
    )


def mechanical_energy(q, p: RobotParams) -> float:
    """Planar mechanical energy with the wheel axle height as potential datum.

    Kinetic terms: wheel translation, wheel spin, body CoM translation,
    body rotation. Potential: m_o g L cos(theta_R).
    """
    _, theta, xdot, thetadot = q
    v_cx = xdot - p.L * math.cos(theta) * thetadot
    v_cz = -p.L * math.sin(theta) * thetadot
    kinetic = (
        0.5 * p.m_w * xdot * xdot
        + 0.5 * p.I_w * (xdot / p.r_w) ** 2
        + 0.5 * p.m_o * (v_cx * v_cx + v_cz * v_cz)
        + 0.5 * p.I_o * thetadot * thetadot
    )
    return kinetic + p.m_o * p.g * p.L * math.cos(theta)
