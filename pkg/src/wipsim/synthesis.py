"""Linearized model, exact discretization, and LQR synthesis.

Linearizing the planar dynamics about the upright rest state gives the
closed forms (with M = m_o + m_w + I_w/r_w^2, D = m_o L^2 + I_o,
c = m_o L, Delta = M D - c^2):

    x''  = (D u + c m_o g L th) / Delta
    th'' = (c u + M m_o g L th) / Delta

The discrete pair (A_d, B_d) is the exact zero-order-hold map obtained
from the exponential of the 5x5 augmented matrix [[A, B], [0, 0]] Ts.
Gains come from the discrete algebraic Riccati fixed point

    P <- Q + A'PA - A'PB (R + B'PB)^-1 B'PA

iterated to machine-exact stationarity, then K = (R + B'PB)^-1 B'PA.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, SynthesisError
from .model import RobotParams, planar_derivative

__all__ = [
    "LinearModel",
    "GainSet",
    "linearize",
    "discretize",
    "solve_dare",
    "lqr_gains",
    "spectral_radius",
    "finite_difference_model",
    "synthesize",
    "default_Q",
    "cruise_Q",
    "default_R",
    "is_stabilizing",
]

DARE_TOL = 1e-12
DARE_MAX_ITER = 1_000_000
EXPM_REL_TOL = 1e-12


@dataclass(frozen=True)
class LinearModel:
    """Continuous (A, B) and, once discretized, (A_d, B_d) at period T_s."""

    A: np.ndarray
    B: np.ndarray
    A_d: np.ndarray | None = None
    B_d: np.ndarray | None = None
    T_s: float | None = None


@dataclass(frozen=True)
class GainSet:
    """State-feedback and PD gains.

    The balance law is u = -k_sign * K . (q - q_des).  k_sign absorbs
    externally tuned gain vectors published under the opposite feedback
    convention (set k_sign=-1 to use them unchanged).
    """

    K: tuple[float, float, float, float]
    K_p: float = 100.0
    K_d: float = 1.0
    K_p_yaw: float = 1.0
    K_d_yaw: float = 0.1
    k_sign: int = 1

    def k_effective(self) -> tuple[float, float, float, float]:
        s = float(self.k_sign)
        return (s * self.K[0], s * self.K[1], s * self.K[2], s * self.K[3])


def default_Q() -> np.ndarray:
    return np.diag([1000.0, 2000.0, 10.0, 1.0])


def cruise_Q() -> np.ndarray:
    """Course-driving weights: wheel-position tracking nearly released.

    Aggressive position hold makes the robot sprint to erase the target
    deficit that accumulates while it catches up to a ramped velocity
    command, pinning the wheels at the speed ceiling; pilots running the
    hardware asked for exactly this reduction.
    """
    return np.diag([1.0, 2000.0, 100.0, 1.0])


def default_R() -> np.ndarray:
    return np.array([[1.0]])


def linearize(p: RobotParams) -> LinearModel:
    """Analytic (A, B) of the planar subsystem about the upright."""
    m_total = p.m_o + p.m_w + p.I_w / p.r_w**2
    d_pitch = p.m_o * p.L**2 + p.I_o
    c = p.m_o * p.L
    delta = m_total * d_pitch - c * c
    if delta <= 0.0:
        raise ConfigError("degenerate parameters: M D - c^2 must be positive")
    mgl = p.m_o * p.g * p.L
    A = np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, c * mgl / delta, 0.0, 0.0],
        [0.0, m_total * mgl / delta, 0.0, 0.0],
    ])
    B = np.array([[0.0], [0.0], [d_pitch / delta], [c / delta]])
    return LinearModel(A=A, B=B)


def _expm(M: np.ndarray, rel_tol: float = EXPM_REL_TOL) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring on a truncated Taylor series."""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise DomainError("nonfinite matrix")
    norm = float(np.max(np.sum(np.abs(M), axis=1)))
    squarings = 0
    while norm > 0.5:
        norm *= 0.5
        squarings += 1
    Ms = M / (2.0**squarings)
    n = M.shape[0]
    result = np.eye(n)
    term = np.eye(n)
    k = 1
    while True:
        term = term @ Ms / k
        result = result + term
        if float(np.max(np.abs(term))) <= rel_tol * float(np.max(np.abs(result))):
            break
        k += 1
        if k > 60:  # series for a matrix of norm <= 0.5 converges long before this
            break
    for _ in range(squarings):
        result = result @ result
    return result


def discretize(m: LinearModel, T_s: float) -> LinearModel:
    """Exact zero-order-hold discretization via the augmented exponential."""
    if not (np.isfinite(T_s) and T_s > 0.0):
        raise ConfigError(f"sampling period must be positive, got {T_s}")
    n = m.A.shape[0]
    k = m.B.shape[1]
    aug = np.zeros((n + k, n + k))
    aug[:n, :n] = m.A * T_s
    aug[:n, n:] = m.B * T_s
    E = _expm(aug)
    return LinearModel(A=m.A, B=m.B, A_d=E[:n, :n], B_d=E[:n, n:], T_s=T_s)


def _check_symmetric(M: np.ndarray, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"{name} must be a square matrix")
    if not np.all(np.isfinite(M)):
        raise DomainError(f"{name} has nonfinite entries")
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * (1.0 + float(np.max(np.abs(M))))):
        raise DomainError(f"{name} must be symmetric")
    return M


def solve_dare(A_d: np.ndarray, B_d: np.ndarray, Q: np.ndarray, R: np.ndarray,
               tol: float = DARE_TOL, max_iter: int = DARE_MAX_ITER) -> np.ndarray:
    """Fixed-point solution of the discrete algebraic Riccati equation.

    Iterates from P = Q until the max-entry change drops below tol (the
    iteration typically lands on an exact floating-point fixed point).
    """
    A = np.asarray(A_d, dtype=float)
    B = np.asarray(B_d, dtype=float)
    Q = _check_symmetric(Q, "Q")
    R = _check_symmetric(R, "R")
    if np.any(np.linalg.eigvalsh(Q) < -1e-10):
        raise DomainError("Q must be positive semidefinite")
    if np.any(np.linalg.eigvalsh(R) <= 0.0):
        raise DomainError("R must be positive definite")

    P = Q.copy()
    for _ in range(max_iter):
        BtP = B.T @ P
        gain = np.linalg.solve(R + BtP @ B, BtP @ A)
        P_next = Q + A.T @ P @ A - (A.T @ P @ B) @ gain
        P_next = 0.5 * (P_next + P_next.T)
        if float(np.max(np.abs(P_next - P))) < tol:
            return P_next
        P = P_next
    raise SynthesisError(f"Riccati iteration did not converge within {max_iter} iterations")


def lqr_gains(A_d: np.ndarray, B_d: np.ndarray, P: np.ndarray, R: np.ndarray) -> np.ndarray:
    """K = (R + B'PB)^-1 B'PA, returned as a flat length-n vector."""
    A = np.asarray(A_d, dtype=float)
    B = np.asarray(B_d, dtype=float)
    BtP = B.T @ np.asarray(P, dtype=float)
    S = np.asarray(R, dtype=float) + BtP @ B
    try:
        K = np.linalg.solve(S, BtP @ A)
    except np.linalg.LinAlgError as exc:
        raise SynthesisError(f"singular (R + B'PB): {exc}") from exc
    return K.reshape(-1)


def _char_poly(M: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients by the Faddeev-LeVerrier recursion."""
    n = M.shape[0]
    coeffs = np.empty(n + 1)
    coeffs[0] = 1.0
    Mk = np.eye(n)
    for k in range(1, n + 1):
        Mk = M @ Mk
        c = -float(np.trace(Mk)) / k
        coeffs[k] = c
        Mk = Mk + c * np.eye(n)
    return coeffs


def spectral_radius(M: np.ndarray) -> float:
    """Largest eigenvalue modulus, from the characteristic polynomial roots.

    Accurate to ~1e-9 for well-separated eigenvalues; repeated eigenvalues
    carry the usual root-multiplicity conditioning penalty.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise DomainError("nonfinite matrix")
    roots = np.roots(_char_poly(M))
    return float(np.max(np.abs(roots)))


def finite_difference_model(p: RobotParams, h: float = 1e-5) -> tuple[np.ndarray, np.ndarray]:
    """(A, B) by central differences of the nonlinear planar derivative at the origin."""
    A = np.zeros((4, 4))
    B = np.zeros((4, 1))
    for j in range(4):
        qp = [0.0] * 4
        qm = [0.0] * 4
        qp[j] = h
        qm[j] = -h
        fp = planar_derivative(qp, 0.0, p)
        fm = planar_derivative(qm, 0.0, p)
        for i in range(4):
            A[i, j] = (fp[i] - fm[i]) / (2.0 * h)
    fp = planar_derivative([0.0] * 4, h, p)
    fm = planar_derivative([0.0] * 4, -h, p)
    for i in range(4):
        B[i, 0] = (fp[i] - fm[i]) / (2.0 * h)
    return A, B


def is_stabilizing(gains: GainSet, model: LinearModel) -> bool:
    if model.A_d is None or model.B_d is None:
        raise ConfigError("model must be discretized first")
    K = np.array(gains.k_effective()).reshape(1, -1)
    return spectral_radius(model.A_d - model.B_d @ K) < 1.0


def synthesize(p: RobotParams, T_s: float = 1e-3,
               Q: np.ndarray | None = None, R: np.ndarray | None = None,
               pd_gains: dict | None = None) -> tuple[LinearModel, GainSet]:
    """Full pipeline: linearize, discretize, solve the Riccati equation,
    and package the gains. Raises SynthesisError if the result fails the
    closed-loop spectral-radius certificate."""
    Q = default_Q() if Q is None else Q
    R = default_R() if R is None else R
    model = discretize(linearize(p), T_s)
    P = solve_dare(model.A_d, model.B_d, Q, R)
    K = lqr_gains(model.A_d, model.B_d, P, R)
    gains = GainSet(K=tuple(float(k) for k in K), **(pd_gains or {}))
    if not is_stabilizing(gains, model):
        raise SynthesisError("synthesized gains fail the spectral-radius stability certificate")
    return model, gains
