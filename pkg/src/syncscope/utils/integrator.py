"""Classical fixed-step fourth-order Runge-Kutta."""
from typing import Callable

import numpy as np

from ..errors import IntegrationError

def rk4_step(rhs: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt: float) -> np.ndarray:
    """Advance the autonomous system x' = rhs(x) by one step of size dt."""
    k1 = rhs(x)
    k2 = rhs(x + 0.5 * dt * k1)
    k3 = rhs(x + 0.5 * dt * k2)
    k4 = rhs(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)

def rk4_amplification(z):
    """Growth factor of one RK4 step applied to x' = lambda*x, with z = lambda*dt."""
    return 1.0 + z + z**2 / 2.0 + z**3 / 6.0 + z**4 / 24.0

def check_linear_step(rates, dt: float) -> None:
    """Reject dt when RK4 would amplify a mode that the exact flow damps (or keeps)."""
    if not dt > 0:
        raise IntegrationError(f"Step size must be positive, got {dt}")
    z = np.atleast_1d(np.asarray(rates, dtype=complex)) * dt
    amplification = np.abs(rk4_amplification(z))
    unstable = (z.real <= 0) & (amplification > 1.0 + 1e-12)
    if np.any(unstable):
        worst = float(np.max(np.abs(z[unstable])) / dt)
        raise IntegrationError(
            f"dt={dt} is outside the RK4 stability region for rate |a - varpi| = {worst:.6g}; reduce dt"
        )
