"""Complex-angle algebra for balanced three-phase signals.

A signal A*e^{j*theta} is carried as its complex angle ln(A) + j*theta. Angles are
kept unwrapped; wrapping only happens when a phasor is evaluated. Amplitudes live
in the log domain, so a zero-amplitude signal cannot be represented.
"""
import math
from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np

from ..errors import EnvelopeDomainError

@dataclass(frozen=True)
class ComplexAngle:
    """theta = ln(A) + j*angle (nepers, radians)."""
    ln_amplitude: float
    angle: float

    def __post_init__(self):
        if not (math.isfinite(self.ln_amplitude) and math.isfinite(self.angle)):
            raise EnvelopeDomainError(
                f"Complex angle must be finite, got ({self.ln_amplitude}, {self.angle})"
            )

    @classmethod
    def from_polar(cls, amplitude: float, angle: float) -> "ComplexAngle":
        if not amplitude > 0:
            raise EnvelopeDomainError(f"Amplitude must be positive, got {amplitude}")
        return cls(math.log(amplitude), angle)

    @classmethod
    def from_complex(cls, value: complex) -> "ComplexAngle":
        return cls(value.real, value.imag)

    @property
    def amplitude(self) -> float:
        return math.exp(self.ln_amplitude)

    def as_complex(self) -> complex:
        return complex(self.ln_amplitude, self.angle)

    def shifted(self, angle: float) -> "ComplexAngle":
        """Same signal with its phase advanced by `angle`."""
        return ComplexAngle(self.ln_amplitude, self.angle + angle)

@dataclass(frozen=True)
class ComplexFrequency:
    """varpi = d(theta)/dt = A'/A + j*omega."""
    amp_rate: float
    angular_freq: float

    def as_complex(self) -> complex:
        return complex(self.amp_rate, self.angular_freq)

@dataclass(frozen=True)
class ComplexPower:
    """S = P + jQ, stored as one complex number."""
    value: complex

    @property
    def real_power(self) -> float:
        return self.value.real

    @property
    def reactive_power(self) -> float:
        return self.value.imag

    def __abs__(self) -> float:
        return abs(self.value)

    def conjugate(self) -> "ComplexPower":
        return ComplexPower(self.value.conjugate())

PowerLike = Union[ComplexPower, complex, float]

def as_power_value(power: PowerLike) -> complex:
    """Plain complex value of a ComplexPower or a number."""
    if isinstance(power, ComplexPower):
        return power.value
    return complex(power)

def to_phasor(theta: ComplexAngle) -> complex:
    """e^theta = A*(cos(angle) + j*sin(angle))."""
    _require_finite(theta)
    amplitude = math.exp(theta.ln_amplitude)
    return complex(amplitude * math.cos(theta.angle), amplitude * math.sin(theta.angle))

def complex_power(theta_n: ComplexAngle, theta_m: ComplexAngle) -> ComplexPower:
    """Demodulate the signal of node n at node m: S_mn = e^{theta_n} * conj(e^{theta_m}).

    Only the angle difference enters, so a carrier shared by both signals cancels.
    """
    _require_finite(theta_n)
    _require_finite(theta_m)
    modulus = math.exp(theta_n.ln_amplitude + theta_m.ln_amplitude)
    difference = theta_n.angle - theta_m.angle
    return ComplexPower(complex(modulus * math.cos(difference), modulus * math.sin(difference)))

def finite_diff_frequency(trajectory: Sequence[ComplexAngle], dt: float) -> List[ComplexFrequency]:
    """Numerical complex frequency of a uniformly sampled complex-angle trajectory.

    Central differences in the interior, one-sided at both ends. Angle samples are
    unwrapped first so that a trajectory stored modulo 2*pi differentiates correctly.
    """
    if len(trajectory) < 2:
        raise EnvelopeDomainError(f"Need at least 2 samples, got {len(trajectory)}")
    if not dt > 0:
        raise EnvelopeDomainError(f"Sample interval must be positive, got {dt}")

    ln_amplitude = np.array([sample.ln_amplitude for sample in trajectory], dtype=float)
    angle = np.unwrap(np.array([sample.angle for sample in trajectory], dtype=float))

    amp_rate = np.gradient(ln_amplitude, dt, edge_order=1)
    angular_freq = np.gradient(angle, dt, edge_order=1)
    return [ComplexFrequency(float(a), float(w)) for a, w in zip(amp_rate, angular_freq)]

def _require_finite(theta: ComplexAngle) -> None:
    if not (math.isfinite(theta.ln_amplitude) and math.isfinite(theta.angle)):
        raise EnvelopeDomainError(f"Non-finite complex angle {theta}")
