"""Channels between nodes: transfer functions, dynamic gains and their linearization.

A channel G(s) = sum_k b_k/(s - a_k) turns the transmitted envelope into the received
one. In the time domain each first-order factor carries a gain g_k obeying
g_k' = (a_k - varpi) g_k + b_k, where varpi is the complex frequency of the
transmitted signal (channel-frequency shift).
"""
from dataclasses import dataclass
from typing import Protocol, Sequence, Tuple

import numpy as np

from ..errors import ChannelError, DegenerateChannelError, PoleProximityError
from ..utils.integrator import check_linear_step, rk4_step
from .envelope import ComplexFrequency, PowerLike, as_power_value

def pole_tolerance(pole: complex) -> float:
    return 1e-9 * (1.0 + abs(pole))

def _as_complex(value) -> complex:
    if isinstance(value, ComplexFrequency):
        return value.as_complex()
    return complex(value)

@dataclass(frozen=True)
class FirstOrderFactor:
    """b/(s - a): pole a (rad/s) and residue b."""
    pole: complex
    residue: complex

    def __post_init__(self):
        object.__setattr__(self, "pole", complex(self.pole))
        object.__setattr__(self, "residue", complex(self.residue))
        if not np.isfinite(self.pole) or not np.isfinite(self.residue):
            raise ChannelError(f"Non-finite channel factor ({self.pole}, {self.residue})")
        if not self.pole.real < 0:
            raise ChannelError(f"Channel pole {self.pole} is not stable (Re(a) must be < 0)")
        if self.residue == 0:
            raise ChannelError("Channel residue must be non-zero")

    def evaluate(self, s: complex) -> complex:
        return self.residue / (s - self.pole)

    def derivative(self, s: complex) -> complex:
        return -self.residue / (s - self.pole) ** 2

class Channel(Protocol):
    """Anything that can be evaluated as a transfer function G(s)."""

    def evaluate(self, s: complex) -> complex:
        ...

    def derivative(self, s: complex) -> complex:
        ...

class RationalChannel:
    """G(s) as an ordered sum of simple first-order factors."""

    def __init__(self, factors: Sequence[FirstOrderFactor]):
        factors = tuple(factors)
        if not factors:
            raise ChannelError("A rational channel needs at least one factor")
        for i, first in enumerate(factors):
            for j in range(i + 1, len(factors)):
                if abs(first.pole - factors[j].pole) < pole_tolerance(first.pole):
                    raise ChannelError(
                        f"Repeated pole {first.pole} (factors {i} and {j}); only simple poles are supported"
                    )
        self._factors = factors
        self._poles = np.array([f.pole for f in factors], dtype=complex)
        self._residues = np.array([f.residue for f in factors], dtype=complex)

    @classmethod
    def from_poles(cls, poles: Sequence[complex], residues: Sequence[complex]) -> "RationalChannel":
        if len(poles) != len(residues):
            raise ChannelError(f"{len(poles)} poles but {len(residues)} residues")
        return cls([FirstOrderFactor(a, b) for a, b in zip(poles, residues)])

    @property
    def factors(self) -> Tuple[FirstOrderFactor, ...]:
        return self._factors

    @property
    def poles(self) -> np.ndarray:
        return self._poles.copy()

    @property
    def residues(self) -> np.ndarray:
        return self._residues.copy()

    def evaluate(self, s: complex) -> complex:
        s = _as_complex(s)
        for k, factor in enumerate(self._factors):
            if abs(s - factor.pole) < pole_tolerance(factor.pole):
                raise PoleProximityError(
                    f"s={s} is within {pole_tolerance(factor.pole):.3g} of pole {factor.pole} (factor {k})",
                    factor_index=k,
                )
        return complex(np.sum(self._residues / (s - self._poles)))

    def derivative(self, s: complex) -> complex:
        s = _as_complex(s)
        self.evaluate(s)  # pole check
        return complex(-np.sum(self._residues / (s - self._poles) ** 2))

    def __repr__(self) -> str:
        return f"RationalChannel(poles={self._poles.tolist()}, residues={self._residues.tolist()})"

class StaticChannel:
    """Frequency-independent channel G(s) = gain; it carries no gain dynamics."""

    def __init__(self, gain: complex):
        self.gain = complex(gain)

    def evaluate(self, s: complex) -> complex:
        return self.gain

    def derivative(self, s: complex) -> complex:
        return 0j

    def __repr__(self) -> str:
        return f"StaticChannel({self.gain})"

@dataclass(frozen=True)
class ChannelGainState:
    """Per-factor gains g_k; the channel gain is their sum."""
    gains: Tuple[complex, ...]

    @property
    def total(self) -> complex:
        return complex(sum(self.gains))

    def as_array(self) -> np.ndarray:
        return np.array(self.gains, dtype=complex)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "ChannelGainState":
        return cls(tuple(complex(v) for v in values))

def quasi_static_gain(ch: RationalChannel, varpi) -> complex:
    """g ~ G(varpi): the channel gain when it tracks the complex frequency instantly."""
    return ch.evaluate(_as_complex(varpi))

def fixed_point_state(ch: RationalChannel, varpi) -> ChannelGainState:
    """Per-factor fixed point g_k = b_k/(varpi - a_k) for a constant varpi."""
    varpi = _as_complex(varpi)
    ch.evaluate(varpi)
    return ChannelGainState.from_array(ch.residues / (varpi - ch.poles))

def step_gain(state: ChannelGainState, varpi, ch: RationalChannel, dt: float) -> ChannelGainState:
    """One RK4 step of g_k' = (a_k - varpi) g_k + b_k with varpi held constant."""
    varpi = _as_complex(varpi)
    rates = ch.poles - varpi
    residues = ch.residues
    check_linear_step(rates, dt)

    gains = state.as_array()
    if gains.shape != rates.shape:
        raise ChannelError(f"State has {gains.size} gains but the channel has {rates.size} factors")
    advanced = rk4_step(lambda g: rates * g + residues, gains, dt)
    return ChannelGainState.from_array(advanced)

def baseband_filter(ch_factor: FirstOrderFactor, omega0: float, s: complex) -> complex:
    """F(s) = (j*omega0 - a)/(s + j*omega0 - a), the low-pass seen by transmitted perturbations."""
    shift = 1j * omega0 - ch_factor.pole
    denominator = complex(s) + shift
    if abs(denominator) < pole_tolerance(shift):
        raise PoleProximityError(f"s={s} is at the base-band filter pole {-shift}")
    return shift / denominator

def perturb_gain(factor: FirstOrderFactor, g0: complex, omega0: float, delta_varpi_n, s: complex) -> complex:
    """Small-signal gain change caused by a transmitter complex-frequency change."""
    shift = 1j * omega0 - factor.pole
    if abs(shift) < pole_tolerance(factor.pole):
        raise DegenerateChannelError(f"Factor pole {factor.pole} sits on the carrier j*{omega0}")
    return -complex(g0) / shift * baseband_filter(factor, omega0, s) * _as_complex(delta_varpi_n)

def perturb_power(S0: PowerLike, delta_theta_m: complex, delta_theta_n: complex, F_val: complex) -> complex:
    """Small-signal change of the received power: S0*(conj(d_theta_m) + F*d_theta_n).

    The receiving end acts instantly; the transmitting end goes through F.
    """
    return as_power_value(S0) * (complex(delta_theta_m).conjugate() + complex(F_val) * complex(delta_theta_n))
