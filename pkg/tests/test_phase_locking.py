import math

import numpy as np
import pytest

from src.syncscope.control.phase_locking import (
    InertiaDynamics,
    PhaseLockConfig,
    angle_sensitivity,
    hybrid_power,
    rotation,
    step_oscillator,
    swing_state_matrix,
)
from src.syncscope.errors import DegenerateLockError, ParameterError, SyncscopeError, UnsupportedDynamicsError
from src.syncscope.network.graph import Edge, NetworkGraph, Node, NodeKind, compute_equilibrium
from src.syncscope.network.model import loaded_channel_matrix
from src.syncscope.signal.channel import StaticChannel
from src.syncscope.signal.envelope import ComplexAngle, ComplexPower

def test_hybrid_power_special_cases_are_exact():
    S = ComplexPower(3 + 4j)
    assert hybrid_power(S, 0.0) == 3.0
    assert hybrid_power(S, math.pi / 2) == 4.0
    assert hybrid_power(1 + 1j, math.pi / 4) == pytest.approx(math.sqrt(2))

def test_hybrid_power_reconstructs_complex_power():
    rng = np.random.default_rng(3)
    for _ in range(50):
        S = complex(*rng.normal(size=2))
        assert hybrid_power(S, 0.0) + 1j * hybrid_power(S, math.pi / 2) == S

def test_hybrid_power_linear_and_periodic():
    S1, S2, eps = 1.5 - 0.2j, -0.4 + 2.0j, 0.77
    assert hybrid_power(S1 + 2 * S2, eps) == pytest.approx(hybrid_power(S1, eps) + 2 * hybrid_power(S2, eps))
    assert hybrid_power(S1, eps + 2 * math.pi) == pytest.approx(hybrid_power(S1, eps))

def test_rotation_exact_at_quarter_turns():
    assert rotation(0.0) == (1.0, 0.0)
    assert rotation(math.pi / 2) == (0.0, 1.0)
    assert rotation(math.pi) == (-1.0, 0.0)
    assert rotation(1.5 * math.pi) == (0.0, -1.0)

def _pair(delta: float):
    """Node m at angle 0, one remote node at angle delta through a unit static channel."""
    nodes = [
        Node("m", NodeKind.VOLTAGE, 1.0, angle=ComplexAngle(math.log(1.5), 0.0)),
        Node("n", NodeKind.VOLTAGE, 1.0, angle=ComplexAngle(math.log(2.0), delta)),
    ]
    return compute_equilibrium(NetworkGraph(nodes, [Edge("m", "n", StaticChannel(1.0))]), 10.0)

def test_angle_sensitivity_special_cases():
    a_bar, a_m = 2.0, 1.5
    assert angle_sensitivity(_pair(0.0), "m", 0.0) == pytest.approx(0.0, abs=1e-15)
    assert angle_sensitivity(_pair(0.0), "m", math.pi / 2) == pytest.approx(a_bar * a_m, abs=1e-12)

    delta = 0.3
    eq = _pair(delta)
    assert angle_sensitivity(eq, "m", 0.0) == pytest.approx(-a_bar * a_m * math.sin(delta), abs=1e-12)
    assert angle_sensitivity(eq, "m", math.pi / 2) == pytest.approx(a_bar * a_m * math.cos(delta), abs=1e-12)

def test_angle_sensitivity_complementary_is_maximal():
    delta = 0.4
    eq = _pair(delta)
    best = angle_sensitivity(eq, "m", delta + math.pi / 2)
    assert best == pytest.approx(2.0 * 1.5, rel=1e-12)
    grid = [angle_sensitivity(eq, "m", eps) for eps in np.linspace(0, 2 * math.pi, 721)]
    assert best >= max(grid) - 1e-12

def test_angle_sensitivity_matches_numeric_derivative():
    """dW/d(delta) by moving the remote angle."""
    eps, delta, h = 0.9, 0.25, 1e-6
    received = [hybrid_power(_pair(delta + sign * h).node_powers["m"], eps) for sign in (1, -1)]
    numeric = (received[0] - received[1]) / (2 * h)
    assert angle_sensitivity(_pair(delta), "m", eps) == pytest.approx(numeric, rel=1e-6)

def test_angle_sensitivity_without_remote_signal():
    eq = compute_equilibrium(NetworkGraph([Node("m", NodeKind.VOLTAGE, 1.0)]), 10.0)
    with pytest.raises(DegenerateLockError):
        angle_sensitivity(eq, "m", 0.0)

def test_phase_lock_config_validation():
    assert PhaseLockConfig(epsilon=-math.pi / 2, inertia=1.0).epsilon == pytest.approx(1.5 * math.pi)
    with pytest.raises(ParameterError):
        PhaseLockConfig(epsilon=0.0, inertia=0.0)
    with pytest.raises(ParameterError):
        PhaseLockConfig(epsilon=0.0, inertia=1.0, damping=-1.0)

def test_invalid_parameters_belong_to_the_library_errors():
    cfg = PhaseLockConfig(epsilon=0.0, inertia=1.0)
    for dt in (0.0, -1e-3):
        with pytest.raises(SyncscopeError):
            step_oscillator((0.0, 10.0), 0.0, cfg, 10.0, dt)
    with pytest.raises(SyncscopeError):
        PhaseLockConfig(epsilon=0.0, inertia=float("nan"))
    # still a ValueError for callers that only know the builtin
    with pytest.raises(ValueError):
        PhaseLockConfig(epsilon=0.0, inertia=-1.0)

def test_step_oscillator_equilibrium():
    cfg = PhaseLockConfig(epsilon=0.0, inertia=2.0, damping=0.3, setpoint=1.2)
    assert step_oscillator((0.5, 314.0), 1.2, cfg, 314.0, 1e-3) == pytest.approx((0.5 + 0.314, 314.0))

def test_step_oscillator_pure_accumulator():
    """D = 0: omega(t) = omega0 + (h/H) t."""
    omega0, h, H, dt = 50.0, 0.2, 4.0, 1e-3
    cfg = PhaseLockConfig(epsilon=0.0, inertia=H, damping=0.0, setpoint=0.0)
    state = (0.0, omega0)
    for _ in range(1000):
        state = step_oscillator(state, h, cfg, omega0, dt)
    assert state[1] == pytest.approx(omega0 + h / H * 1.0, abs=1e-9)

def test_step_oscillator_first_order_settling():
    """H = D = 1, W - W* = 0.1: omega - omega0 = 0.1 (1 - e^-t)."""
    omega0, dt = 10.0, 1e-3
    cfg = PhaseLockConfig(epsilon=0.0, inertia=1.0, damping=1.0, setpoint=0.0)
    state = (0.0, omega0)
    for k in range(1, 8001):
        state = step_oscillator(state, 0.1, cfg, omega0, dt)
        if k % 1000 == 0:
            assert state[1] - omega0 == pytest.approx(0.1 * (1 - math.exp(-k * dt)), abs=1e-6)
    assert state[1] == pytest.approx(omega0 + 0.1, abs=1e-4)

def test_inertia_dynamics():
    T = InertiaDynamics(0.5)
    assert T.transfer(0) == pytest.approx(2.0)
    assert abs(T.transfer(1e9j)) < 1e-8
    assert T.forbidden_region(1j) == pytest.approx(-1j * (1j + 0.5))
    with pytest.raises(UnsupportedDynamicsError):
        InertiaDynamics(-0.1)

def test_swing_reduction_lossless_pair(lossless_pair):
    """Two identical voltage nodes on an inductive line: oscillatory at D=0, damped at D>0."""
    omega0 = 10.0
    graph = lossless_pair(damping=0.0, angle2=0.1)
    K = loaded_channel_matrix(compute_equilibrium(graph, omega0), graph)

    undamped = np.linalg.eigvals(swing_state_matrix(K, graph.inertia, 0.0))
    oscillatory = undamped[np.abs(undamped) > 1e-6]
    assert oscillatory.size == 2
    np.testing.assert_allclose(oscillatory.real, 0.0, atol=1e-9)
    np.testing.assert_allclose(np.abs(oscillatory.imag), math.sqrt(2 * math.cos(0.1) / 1.0), rtol=1e-9)

    damped = np.linalg.eigvals(swing_state_matrix(K, graph.inertia, 0.4))
    assert np.all(damped[np.abs(damped) > 1e-6].real < 0)
