"""Small-gain synchronization criterion.

Every connectivity mode xi_m must keep an s-scaled distance zeta_m from the forbidden
region {-s/T(s) : Re(s) > 0} larger than sigma_max, the largest singular value of the
inertia-scaled channel-frequency-shift matrix in modal coordinates. Passing is
sufficient for stability; failing proves nothing.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from ..control.phase_locking import InertiaDynamics
from ..errors import ParameterError, ResonanceError
from ..network.model import SynchronizationModel

logger = logging.getLogger("syncscope")

@dataclass(frozen=True)
class FrequencyGrid:
    """Logarithmic boundary grid, mirrored to negative frequencies."""
    omega_lo: float = 1e-4
    omega_hi: float = 1e6
    points: int = 2000

    def __post_init__(self):
        if not (0 < self.omega_lo < self.omega_hi):
            raise ParameterError(f"Need 0 < omega_lo < omega_hi, got [{self.omega_lo}, {self.omega_hi}]")
        if self.points < 3:
            raise ParameterError(f"Need at least 3 grid points, got {self.points}")

    def positive(self) -> np.ndarray:
        return np.logspace(math.log10(self.omega_lo), math.log10(self.omega_hi), self.points)

    def signed(self) -> np.ndarray:
        omegas = self.positive()
        return np.concatenate([-omegas[::-1], omegas])

class Verdict(str, Enum):
    CERTIFIED_STABLE = "CertifiedStable"
    NOT_CERTIFIED = "NotCertified"

@dataclass(frozen=True)
class ZetaResult:
    value: float
    # None when the infimum is the |s| -> infinity limit
    argmin: Optional[complex]
    interior_zero: bool = False

@dataclass(frozen=True)
class ModeResult:
    index: int
    xi: complex
    zeta: float
    argmin: Optional[complex]
    passed: bool
    interior_zero: bool = False

@dataclass(frozen=True)
class StabilityReport:
    modes: List[ModeResult]
    sigma_max: float
    margin: float
    zeta_min: float
    zeta_max: float
    margin_max: float
    verdict: Verdict
    damping: float
    forbidden_region: np.ndarray = field(repr=False)
    small_gain_peak: float = float("nan")

def _boundary_modulus(xi: complex, T: InertiaDynamics, omega):
    s = 1j * omega
    return np.abs(xi / s + T.inverse(s))

def zeta(xi: complex, T: InertiaDynamics, grid: FrequencyGrid = FrequencyGrid()) -> ZetaResult:
    """zeta = inf over Re(s) > 0 of |(xi + s/T(s))/s|.

    phi(s) = xi/s + 1/T(s) is analytic in the open right half-plane, so unless its
    numerator has a zero there the infimum sits on the imaginary axis: a coarse log
    sweep over both signs of omega, a bounded golden-section refinement around the
    best sample, and the s -> 0 and |s| -> infinity limits.
    """
    xi = complex(xi)

    roots = np.roots(T.numerator(xi))
    inside = [r for r in roots if r.real > 1e-9 * (1.0 + abs(r))]
    if inside:
        logger.warning(f"Mode xi={xi:.6g} has a zero of xi + s/T(s) at s={inside[0]:.6g} inside "
                       f"the right half-plane; zeta is 0 there")
        return ZetaResult(0.0, complex(inside[0]), interior_zero=True)

    omegas = grid.signed()
    values = _boundary_modulus(xi, T, omegas)
    best = int(np.argmin(values))
    best_value, best_omega = float(values[best]), float(omegas[best])
    # the synchronous mode's infimum is the s -> 0 limit, handled below
    if best in (0, grid.points - 1, grid.points, omegas.size - 1) and abs(xi) > 1e-12:
        logger.warning(f"Mode xi={xi:.6g}: boundary minimum at the grid edge |omega|={abs(best_omega):.6g} "
                       f"(grid [{grid.omega_lo:.3g}, {grid.omega_hi:.3g}]); zeta may be overestimated, "
                       f"widen the grid")

    # refine on log|omega| between the neighbours of the best sample on the same side
    sign = 1.0 if best_omega > 0 else -1.0
    side = np.log10(np.abs(omegas[(omegas > 0) if sign > 0 else (omegas < 0)]))
    k = int(np.argmin(np.abs(side - math.log10(abs(best_omega)))))
    lo, hi = side[max(k - 1, 0)], side[min(k + 1, side.size - 1)]
    if lo > hi:
        lo, hi = hi, lo
    refined = minimize_scalar(
        lambda u: float(_boundary_modulus(xi, T, sign * 10.0 ** u)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-7},
    )
    if refined.fun < best_value:
        best_value, best_omega = float(refined.fun), sign * 10.0 ** float(refined.x)
    result = ZetaResult(best_value, 1j * best_omega)

    # s -> 0: only finite for the synchronous mode
    if abs(xi) <= 1e-12:
        zero_limit = abs(T.inverse(0.0))
        if zero_limit <= result.value:
            result = ZetaResult(float(zero_limit), 0j)

    return result

def sigma_max(gamma_h_phi: np.ndarray) -> float:
    """Largest singular value."""
    matrix = np.asarray(gamma_h_phi)
    if matrix.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(matrix)[0])

def loop_gain(model: SynchronizationModel, T: InertiaDynamics, s: complex) -> np.ndarray:
    """[Gamma_HPhi] (1/T(s) I + diag(xi)/s)^-1, the combined loop gain in modal coordinates."""
    s = complex(s)
    if s == 0:
        raise ResonanceError("The loop gain is not defined at s = 0")
    inverse_T = T.inverse(s)
    diagonal = inverse_T + model.xi / s
    scale = 1e-12 * (1.0 + abs(inverse_T))
    for m, value in enumerate(diagonal):
        if abs(value) < scale:
            raise ResonanceError(f"s={s} is a resonance of mode {m} (xi={model.xi[m]:.6g})", mode_index=m)
    return model.gamma_h_phi / diagonal[None, :]

def loop_gain_sweep(model: SynchronizationModel, T: InertiaDynamics, omegas: np.ndarray) -> np.ndarray:
    """Spectral norm of loop_gain(j*omega) per frequency; inf at resonances."""
    norms = np.empty(len(omegas))
    for i, omega in enumerate(omegas):
        try:
            norms[i] = np.linalg.norm(loop_gain(model, T, 1j * omega), 2)
        except ResonanceError:
            norms[i] = np.inf
    return norms

def evaluate_criterion(model: SynchronizationModel, T: InertiaDynamics,
                       grid: FrequencyGrid = FrequencyGrid(), threads: int = 1,
                       region_samples: int = 200) -> StabilityReport:
    """zeta per mode, sigma_max, margins and verdict.

    Modes are evaluated concurrently when threads > 1; results keep mode order.
    """
    xis = [complex(x) for x in model.xi]
    if threads > 1 and len(xis) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            zetas = list(pool.map(lambda x: zeta(x, T, grid), xis))
    else:
        zetas = [zeta(x, T, grid) for x in xis]

    sigma = sigma_max(model.gamma_h_phi)
    modes = [
        ModeResult(index=m, xi=xi, zeta=z.value, argmin=z.argmin, passed=z.value > sigma,
                   interior_zero=z.interior_zero)
        for m, (xi, z) in enumerate(zip(xis, zetas))
    ]
    zeta_values = [mode.zeta for mode in modes]
    zeta_min, zeta_max = min(zeta_values), max(zeta_values)
    verdict = Verdict.CERTIFIED_STABLE if all(mode.passed for mode in modes) else Verdict.NOT_CERTIFIED

    region_s = 1j * np.logspace(math.log10(grid.omega_lo), math.log10(grid.omega_hi), region_samples)
    peak = float(np.max(loop_gain_sweep(model, T, grid.signed())))

    for mode in modes:
        logger.debug(f"mode {mode.index}: xi={mode.xi:.6g} zeta={mode.zeta:.6g} passed={mode.passed}")
    logger.info(f"Criterion: sigma_max={sigma:.6g}, min zeta={zeta_min:.6g}, verdict={verdict.value}")

    return StabilityReport(
        modes=modes,
        sigma_max=sigma,
        margin=zeta_min - sigma,
        zeta_min=zeta_min,
        zeta_max=zeta_max,
        margin_max=zeta_max - sigma,
        verdict=verdict,
        damping=T.damping,
        forbidden_region=T.forbidden_region(region_s),
        small_gain_peak=peak,
    )
