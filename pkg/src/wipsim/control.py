"""Per-tick control laws: LQR balance, yaw PD, height PD, torque split.

All functions are stateless; the tick loop owns whatever integrators the
desired-state generation needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError
from .model import ActuatorCommand, RobotParams
from .synthesis import GainSet

__all__ = [
    "DesiredState",
    "ControlFlags",
    "stabilize",
    "yaw_control",
    "yaw_from_encoders",
    "height_control",
    "compose_command",
]

# flag bits, shared with telemetry and run logs
FLAG_SAT_LEFT = 1
FLAG_SAT_RIGHT = 2
FLAG_SAT_HIP = 4
FLAG_SPEED_LIMIT = 8
FLAG_STALE = 16
FLAG_HEIGHT_CLAMP = 32
FLAG_GAINS_CHANGED = 64

FLAG_NAMES = {
    FLAG_SAT_LEFT: "sat_left",
    FLAG_SAT_RIGHT: "sat_right",
    FLAG_SAT_HIP: "sat_hip",
    FLAG_SPEED_LIMIT: "speed_limit",
    FLAG_STALE: "stale",
    FLAG_HEIGHT_CLAMP: "height_clamp",
    FLAG_GAINS_CHANGED: "gains_changed",
}


@dataclass(frozen=True)
class DesiredState:
    x_des: float = 0.0
    xdot_des: float = 0.0
    theta_R_des: float = 0.0
    thetadot_R_des: float = 0.0
    gamma_des: float = 0.0
    gammadot_des: float = 0.0
    theta_1_des: float = 0.6435011087932844


@dataclass(frozen=True)
class ControlFlags:
    sat_left: bool = False
    sat_right: bool = False
    sat_hip: bool = False
    speed_limit: bool = False

    def bits(self) -> int:
        return (
            (FLAG_SAT_LEFT if self.sat_left else 0)
            | (FLAG_SAT_RIGHT if self.sat_right else 0)
            | (FLAG_SAT_HIP if self.sat_hip else 0)
            | (FLAG_SPEED_LIMIT if self.speed_limit else 0)
        )


def stabilize(d: DesiredState, q: Sequence[float], k: Sequence[float]) -> float:
    """Axial force u = -k . (q - q_des) on the planar state."""
    e0 = q[0] - d.x_des
    e1 = q[1] - d.theta_R_des
    e2 = q[2] - d.xdot_des
    e3 = q[3] - d.thetadot_R_des
    return -(k[0] * e0 + k[1] * e1 + k[2] * e2 + k[3] * e3)


def yaw_control(gamma_des: float, gammadot_des: float, gamma: float, gammadot: float,
                gains: GainSet) -> float:
    """Heading PD torque."""
    if gains.K_p_yaw < 0.0 or gains.K_d_yaw < 0.0:
        raise DomainError("yaw PD gains must be nonnegative")
    return gains.K_p_yaw * (gamma_des - gamma) + gains.K_d_yaw * (gammadot_des - gammadot)


def yaw_from_encoders(theta_wR: float, theta_wL: float, p: RobotParams) -> float:
    """Yaw reconstructed from cumulative wheel angles (no-slip)."""
    return (p.r_w / p.r_c) * (theta_wR - theta_wL)


def height_control(theta_1_des: float, theta_1: float, thetadot_1: float,
                   p: RobotParams, gains: GainSet) -> tuple[float, bool]:
    """Hip torque: gravity feedforward through the leg Jacobian plus PD.

    theta_1 outside (0, pi/2) is clamped for the Jacobian evaluation and
    reported via the returned flag. The desired hip rate is fixed at zero.
    """
    clamped = not (0.0 < theta_1 < 0.5 * math.pi)
    th = min(max(theta_1, 1e-6), 0.5 * math.pi - 1e-6)
    jac = -2.0 * p.l_leg * math.sin(th)
    tau = jac * p.m_o * p.g + gains.K_p * (theta_1_des - theta_1) + gains.K_d * (0.0 - thetadot_1)
    return tau, clamped


def compose_command(u: float, tau_yaw: float, tau_hip: float, p: RobotParams,
                    omega_L: float | None = None,
                    omega_R: float | None = None) -> tuple[ActuatorCommand, ControlFlags]:
    """Split (axial force, yaw torque) onto the wheel motors and saturate.

    Before clamping the split is linear and invertible:
    u = (tau_L + tau_R)/r_w and tau_yaw = tau_R - tau_L. When a wheel is
    at the speed limit, torque pushing it further is cut to zero.
    """
    if not all(math.isfinite(v) for v in (u, tau_yaw, tau_hip)):
        raise DomainError("nonfinite command inputs")
    tau_L = u * p.r_w / 2.0 - tau_yaw / 2.0
    tau_R = u * p.r_w / 2.0 + tau_yaw / 2.0

    speed_limited = False
    if omega_L is not None and abs(omega_L) >= p.omega_max and tau_L * omega_L > 0.0:
        tau_L = 0.0
        speed_limited = True
    if omega_R is not None and abs(omega_R) >= p.omega_max and tau_R * omega_R > 0.0:
        tau_R = 0.0
        speed_limited = True

    sat_l = abs(tau_L) > p.tau_max
    sat_r = abs(tau_R) > p.tau_max
    sat_h = abs(tau_hip) > p.tau_max
    cmd = ActuatorCommand(
        tau_L=min(max(tau_L, -p.tau_max), p.tau_max),
        tau_R=min(max(tau_R, -p.tau_max), p.tau_max),
        tau_hip=min(max(tau_hip, -p.tau_max), p.tau_max),
    )
    return cmd, ControlFlags(sat_left=sat_l, sat_right=sat_r, sat_hip=sat_h,
                             speed_limit=speed_limited)
