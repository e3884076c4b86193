"""Nonlinear time-domain model of the isomorphic loop.

Every node modulates e^{theta_n}; every directed channel use scales it by a gain g_mn
driven by the transmitter's complex frequency; each receiver demodulates, sums and
projects onto its hybrid power, which drives its oscillator. All of it is integrated
together by fixed-step RK4.

Angles are integrated in the frame rotating at omega0 (theta - omega0*t). Powers only
depend on angle differences, so this changes nothing physical and makes the
operating point a true fixed point of the state vector. Amplitudes are held constant.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..control.phase_locking import oscillator_acceleration, rotation
from ..errors import SimulationError, UnsupportedGainModeError
from ..network.graph import Equilibrium, NetworkGraph
from ..signal.channel import ChannelGainState, RationalChannel, StaticChannel
from ..utils.integrator import check_linear_step, rk4_step

logger = logging.getLogger("syncscope")

Pair = Tuple[str, str]

class GainMode(str, Enum):
    DYNAMIC = "dynamic"
    QUASI_STATIC = "quasistatic"

@dataclass(frozen=True)
class Perturbation:
    node: str
    delta_theta: float = 0.0
    delta_omega: float = 0.0

@dataclass
class SystemState:
    """theta: carrier-frame angles; gains: per-factor channel states (dynamic mode only)."""
    t: float
    theta: np.ndarray
    omega: np.ndarray
    ln_amplitude: np.ndarray
    gains: Dict[Pair, ChannelGainState] = field(default_factory=dict)

@dataclass
class SimulationTrace:
    node_ids: List[str]
    channel_pairs: List[Pair]
    times: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    power: np.ndarray
    hybrid: np.ndarray
    gains: np.ndarray
    metadata: Dict = field(default_factory=dict)
    diverged: bool = False
    divergence_time: Optional[float] = None

    def __len__(self) -> int:
        return len(self.times)

class IsomorphicSimulator:
    """Simulation context for one graph at one equilibrium."""

    def __init__(self, graph: NetworkGraph, eq: Equilibrium, gain_mode: GainMode = GainMode.DYNAMIC,
                 config_hash: Optional[str] = None):
        self.graph = graph
        self.eq = eq
        self.gain_mode = GainMode(gain_mode)
        self.config_hash = config_hash
        self.omega0 = eq.omega0
        self.node_ids = graph.node_ids
        n = len(graph)
        self.n = n

        self.inertia = graph.inertia
        self.damping = graph.damping
        self.setpoints = np.array([eq.setpoints[node_id] for node_id in self.node_ids])
        self.ln_amplitude = np.array([eq.angles[node_id].ln_amplitude for node_id in self.node_ids])
        self.theta0 = np.array([eq.angles[node_id].angle for node_id in self.node_ids])
        rotations = [rotation(node.epsilon) for node in graph.nodes]
        self.cos_eps = np.array([r[0] for r in rotations])
        self.sin_eps = np.array([r[1] for r in rotations])

        channels = graph.directed_channels()
        self.channel_pairs: List[Pair] = [(m, src) for m, src, _ in channels]
        self.channels = [channel for _, _, channel in channels]
        self.receivers = np.array([graph.index(m) for m, _, _ in channels], dtype=int)
        self.transmitters = np.array([graph.index(src) for _, src, _ in channels], dtype=int)

        # per-factor layout of the dynamic gain states
        self.static_gain = np.zeros(len(self.channels), dtype=complex)
        poles, residues, owner = [], [], []
        self.factor_slices: Dict[Pair, slice] = {}
        for c, channel in enumerate(self.channels):
            if isinstance(channel, StaticChannel):
                self.static_gain[c] = channel.gain
                continue
            if self.gain_mode is GainMode.DYNAMIC:
                if not isinstance(channel, RationalChannel):
                    raise UnsupportedGainModeError(
                        f"Channel {self.channel_pairs[c]} ({channel!r}) has no pole/residue form; "
                        f"simulate it in quasistatic mode"
                    )
                start = len(poles)
                poles.extend(channel.poles)
                residues.extend(channel.residues)
                owner.extend([c] * len(channel.factors))
                self.factor_slices[self.channel_pairs[c]] = slice(start, len(poles))
        self.poles = np.array(poles, dtype=complex)
        self.residues = np.array(residues, dtype=complex)
        self.factor_channel = np.array(owner, dtype=int)
        self.factor_transmitter = self.transmitters[self.factor_channel] if owner else np.zeros(0, dtype=int)
        self.n_factors = len(poles)
        self.dynamic_channels = np.array(
            [not isinstance(ch, StaticChannel) for ch in self.channels], dtype=bool
        )

    # -- state packing -------------------------------------------------------------

    @property
    def state_size(self) -> int:
        return 2 * self.n + 2 * self.n_factors

    def pack(self, state: SystemState) -> np.ndarray:
        g = np.zeros(self.n_factors, dtype=complex)
        for pair, span in self.factor_slices.items():
            g[span] = state.gains[pair].as_array()
        return np.concatenate([state.theta, state.omega, g.real, g.imag])

    def _split(self, x: np.ndarray):
        n, k = self.n, self.n_factors
        return x[:n], x[n:2 * n], x[2 * n:2 * n + k] + 1j * x[2 * n + k:]

    def unpack(self, x: np.ndarray, t: float) -> SystemState:
        theta, omega, g = self._split(x)
        gains = {pair: ChannelGainState.from_array(g[span]) for pair, span in self.factor_slices.items()}
        return SystemState(t=t, theta=theta.copy(), omega=omega.copy(),
                           ln_amplitude=self.ln_amplitude.copy(), gains=gains)

    # -- loop ----------------------------------------------------------------------

    def channel_gains(self, omega: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Total gain of every directed channel use."""
        total = self.static_gain.copy()
        if self.gain_mode is GainMode.DYNAMIC:
            np.add.at(total, self.factor_channel, g)
        else:
            for c in np.flatnonzero(self.dynamic_channels):
                total[c] = self.channels[c].evaluate(1j * omega[self.transmitters[c]])
        return total

    def received_power(self, theta: np.ndarray, gains: np.ndarray) -> np.ndarray:
        """S_m = sum_n g_mn e^{theta_n} conj(e^{theta_m}), self-channels included."""
        r, t = self.receivers, self.transmitters
        modulus = np.exp(self.ln_amplitude[t] + self.ln_amplitude[r])
        difference = theta[t] - theta[r]
        demodulated = modulus * (np.cos(difference) + 1j * np.sin(difference))
        power = np.zeros(self.n, dtype=complex)
        np.add.at(power, r, gains * demodulated)
        return power

    def hybrid_power(self, power: np.ndarray) -> np.ndarray:
        return power.real * self.cos_eps + power.imag * self.sin_eps

    def derivative(self, x: np.ndarray) -> np.ndarray:
        theta, omega, g = self._split(x)
        gains = self.channel_gains(omega, g)
        W = self.hybrid_power(self.received_power(theta, gains))

        d_theta = omega - self.omega0
        d_omega = oscillator_acceleration(omega, W, self.inertia, self.damping, self.setpoints, self.omega0)
        # channel-frequency shift: each factor is driven by its transmitter's varpi = j*omega
        d_g = (self.poles - 1j * omega[self.factor_transmitter]) * g + self.residues
        return np.concatenate([d_theta, d_omega, d_g.real, d_g.imag])

    # -- operations ----------------------------------------------------------------

    def init_state(self) -> SystemState:
        """Equilibrium state: configured angles, omega0, quasi-static gains G(j*omega0)."""
        s0 = 1j * self.omega0
        g = self.residues / (s0 - self.poles) if self.n_factors else np.zeros(0, dtype=complex)
        x = np.concatenate([self.theta0, np.full(self.n, self.omega0), g.real, g.imag])
        return self.unpack(x, 0.0)

    def residual(self, state: SystemState) -> float:
        """max |d(state)/dt|; zero at a fixed point."""
        return float(np.max(np.abs(self.derivative(self.pack(state)))))

    def step(self, state: SystemState, dt: float) -> SystemState:
        x = rk4_step(self.derivative, self.pack(state), dt)
        return self.unpack(x, state.t + dt)

    def perturbed_state(self, perturbations: Sequence[Perturbation]) -> SystemState:
        state = self.init_state()
        for p in perturbations:
            i = self.graph.index(p.node)
            state.theta[i] += p.delta_theta
            state.omega[i] += p.delta_omega
        return state

    def check_step(self, dt: float) -> None:
        """Reject dt that the gain ODEs cannot be integrated with."""
        if self.n_factors:
            check_linear_step(self.poles - 1j * self.omega0, dt)
        elif not dt > 0:
            check_linear_step([], dt)

    def _diverged(self, x: np.ndarray) -> bool:
        if not np.all(np.isfinite(x)):
            return True
        omega = x[self.n:2 * self.n]
        return bool(np.any(np.abs(omega - self.omega0) > 10.0 * abs(self.omega0)))

    def _sample(self, x: np.ndarray):
        theta, omega, g = self._split(x)
        gains = self.channel_gains(omega, g)
        power = self.received_power(theta, gains)
        return theta.copy(), omega.copy(), power, self.hybrid_power(power), gains

    def run(self, perturbations: Sequence[Perturbation] = (), duration: float = 10.0,
            dt: float = 1e-4, dt_out: float = 1e-3) -> SimulationTrace:
        """Integrate from the perturbed equilibrium and sample every dt_out.

        A non-finite state or |omega - omega0| > 10*omega0 stops the run; the trace
        then ends at the last good sample and is flagged as diverged.
        """
        if not duration > 0:
            raise SimulationError(f"Duration must be positive, got {duration}")
        self.check_step(dt)
        stride = max(1, int(round(dt_out / dt)))
        n_steps = int(round(duration / dt))

        x = self.pack(self.perturbed_state(perturbations))
        samples = [(0.0, self._sample(x))]
        diverged, divergence_time = False, None

        for k in range(1, n_steps + 1):
            x = rk4_step(self.derivative, x, dt)
            if self._diverged(x):
                diverged, divergence_time = True, k * dt
                logger.warning(f"Simulation diverged at t={divergence_time:.6g} s")
                break
            if k % stride == 0:
                samples.append((k * dt, self._sample(x)))

        trace = SimulationTrace(
            node_ids=list(self.node_ids),
            channel_pairs=list(self.channel_pairs),
            times=np.array([t for t, _ in samples]),
            theta=np.array([s[0] for _, s in samples]),
            omega=np.array([s[1] for _, s in samples]),
            power=np.array([s[2] for _, s in samples]),
            hybrid=np.array([s[3] for _, s in samples]),
            gains=np.array([s[4] for _, s in samples]),
            metadata={
                "dt": dt,
                "dt_out": stride * dt,
                "duration": duration,
                "omega0": self.omega0,
                "gain_mode": self.gain_mode.value,
                "perturbations": [
                    {"node": p.node, "delta_theta": p.delta_theta, "delta_omega": p.delta_omega}
                    for p in perturbations
                ],
                "config_hash": self.config_hash,
            },
            diverged=diverged,
            divergence_time=divergence_time,
        )
        logger.info(f"Simulated {len(trace)} samples ({self.gain_mode.value} gains), diverged={diverged}")
        return trace

    def linearize_numeric(self, h: float = 1e-6) -> np.ndarray:
        """Central-difference Jacobian of the full right-hand side at the equilibrium."""
        x0 = self.pack(self.init_state())
        size = x0.size
        J = np.zeros((size, size))
        for i in range(size):
            step = np.zeros(size)
            step[i] = h
            J[:, i] = (self.derivative(x0 + step) - self.derivative(x0 - step)) / (2.0 * h)
        return J
