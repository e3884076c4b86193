"""Unified phase locking: hybrid power, its angle sensitivity and the inertia loop.

A node locks its oscillator by accumulating the deviation of its hybrid power
W = Re(e^{-j*eps} * S) from a setpoint. eps = 0 gives real-power locking (machine-like
inertia), eps = pi/2 reactive-power locking (PLL-like), anything else a mix.
"""
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Tuple

import numpy as np

from ..errors import DegenerateLockError, ParameterError, UnsupportedDynamicsError
from ..signal.envelope import PowerLike, as_power_value, to_phasor
from ..utils.integrator import rk4_step

if TYPE_CHECKING:
    from ..network.graph import Equilibrium

logger = logging.getLogger("syncscope")

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi

def rotation(epsilon: float) -> Tuple[float, float]:
    """(cos eps, sin eps), exact at multiples of pi/2 so that W is exactly P or Q there."""
    quarter_turns = epsilon / HALF_PI
    nearest = round(quarter_turns)
    if abs(quarter_turns - nearest) < 1e-14 * max(1.0, abs(quarter_turns)):
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[nearest % 4]
    return math.cos(epsilon), math.sin(epsilon)

@dataclass(frozen=True)
class PhaseLockConfig:
    """Per-node locking parameters; epsilon is normalized into [0, 2*pi)."""
    epsilon: float
    inertia: float
    damping: float = 0.0
    setpoint: float = 0.0

    def __post_init__(self):
        if not self.inertia > 0:
            raise ParameterError(f"Hybrid inertia must be positive, got {self.inertia}")
        if not self.damping >= 0:
            raise ParameterError(f"Damping must be non-negative, got {self.damping}")
        object.__setattr__(self, "epsilon", math.fmod(self.epsilon, TWO_PI) % TWO_PI)

@dataclass(frozen=True)
class InertiaDynamics:
    """T(s) = 1/(s + D): a damped accumulator, a pure integrator when D = 0."""
    damping: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.damping):
            raise UnsupportedDynamicsError(f"Damping must be finite, got {self.damping}")
        if self.damping < 0:
            raise UnsupportedDynamicsError(
                f"T(s) = 1/(s + {self.damping}) has a right-half-plane pole; only D >= 0 is supported"
            )

    def transfer(self, s: complex) -> complex:
        return 1.0 / (s + self.damping)

    def inverse(self, s: complex):
        """1/T(s); works on scalars and arrays."""
        return s + self.damping

    def forbidden_region(self, s):
        """-s/T(s), the image of the right half-plane that modes must keep away from."""
        return -s * self.inverse(s)

    def numerator(self, xi: complex) -> np.ndarray:
        """Polynomial coefficients of xi + s/T(s) = s^2 + D*s + xi."""
        return np.array([1.0, self.damping, xi], dtype=complex)

def hybrid_power(S_hat: PowerLike, epsilon: float) -> float:
    """W = Re(e^{-j*eps} * S) = P*cos(eps) + Q*sin(eps)."""
    value = as_power_value(S_hat)
    cos_eps, sin_eps = rotation(epsilon)
    return value.real * cos_eps + value.imag * sin_eps

def angle_sensitivity(eq: "Equilibrium", node: str, epsilon: float) -> float:
    """dW_m/d(delta_m) at the equilibrium, with delta_m = mean remote angle - theta_m.

    The remote signals aggregate as A_bar*e^{j*theta_bar} = sum_{n != m} g_mn * e^{theta_n}.
    """
    remote = 0j
    for (m, n), gain in eq.gains.items():
        if m == node and n != node:
            remote += gain * to_phasor(eq.angles[n])
    a_bar = abs(remote)
    if a_bar == 0.0:
        raise DegenerateLockError(f"Node {node!r} receives no signal from other nodes")

    own = eq.angles[node]
    delta = math.atan2(remote.imag, remote.real) - own.angle
    cos_eps, sin_eps = rotation(epsilon)
    return a_bar * own.amplitude * (-cos_eps * math.sin(delta) + sin_eps * math.cos(delta))

def oscillator_acceleration(omega, W, inertia, damping, setpoint, omega0):
    """d(omega)/dt = (W - W*)/H - D*(omega - omega0); vectorizes over nodes."""
    return (W - setpoint) / inertia - damping * (omega - omega0)

def step_oscillator(state: Tuple[float, float], W: float, cfg: PhaseLockConfig,
                    omega0: float, dt: float) -> Tuple[float, float]:
    """One RK4 step of theta' = omega, H*omega' = (W - W*) - H*D*(omega - omega0), W held fixed."""
    if not dt > 0:
        raise ParameterError(f"Step size must be positive, got {dt}")

    def rhs(x: np.ndarray) -> np.ndarray:
        return np.array([
            x[1],
            oscillator_acceleration(x[1], W, cfg.inertia, cfg.damping, cfg.setpoint, omega0),
        ])

    theta, omega = rk4_step(rhs, np.array(state, dtype=float), dt)
    return float(theta), float(omega)

def swing_state_matrix(K: np.ndarray, inertia: np.ndarray, damping: float) -> np.ndarray:
    """Classic swing linearization [[0, I], [-H^-1 K, -D I]] over (d_theta, d_omega)."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    K_H = K / np.asarray(inertia, dtype=float)[:, None]
    top = np.hstack([np.zeros((n, n)), np.eye(n)])
    bottom = np.hstack([-K_H, -damping * np.eye(n)])
    return np.vstack([top, bottom])
