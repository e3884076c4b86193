import math

import numpy as np
import pytest

from src.syncscope.errors import ChannelError, DegenerateChannelError, IntegrationError, PoleProximityError
from src.syncscope.signal.channel import (
    ChannelGainState,
    FirstOrderFactor,
    RationalChannel,
    StaticChannel,
    baseband_filter,
    fixed_point_state,
    perturb_gain,
    perturb_power,
    quasi_static_gain,
    step_gain,
)
from src.syncscope.signal.envelope import ComplexAngle, ComplexFrequency, ComplexPower, complex_power

def test_quasi_static_gain_examples():
    single = RationalChannel.from_poles([-1], [1])
    assert quasi_static_gain(single, ComplexFrequency(0, 1)) == pytest.approx(0.5 - 0.5j)
    assert quasi_static_gain(single, 0) == pytest.approx(1.0)
    pair = RationalChannel.from_poles([-1, -2], [1, -1])
    assert quasi_static_gain(pair, 0) == pytest.approx(0.5)

def test_evaluate_matches_factor_sum():
    channel = RationalChannel.from_poles([-1 + 3j, -2 - 1j, -0.5], [2, 1j, -0.3 + 0.1j])
    s = 0.2 + 4.1j
    expected = sum(f.evaluate(s) for f in channel.factors)
    assert channel.evaluate(s) == pytest.approx(expected, rel=1e-14)

def test_pole_proximity_names_factor():
    channel = RationalChannel.from_poles([-1, -5], [1, 1])
    with pytest.raises(PoleProximityError) as info:
        channel.evaluate(-5 + 1e-12)
    assert info.value.factor_index == 1

@pytest.mark.parametrize("pole, residue", [(0.0, 1.0), (1.0 + 2j, 1.0), (-1.0, 0.0)])
def test_invalid_factor_rejected(pole, residue):
    with pytest.raises(ChannelError):
        FirstOrderFactor(pole, residue)

def test_repeated_and_mismatched_poles_rejected():
    with pytest.raises(ChannelError):
        RationalChannel.from_poles([-1, -1], [1, 2])
    with pytest.raises(ChannelError):
        RationalChannel.from_poles([-1, -2], [1])
    with pytest.raises(ChannelError):
        RationalChannel([])

def test_derivative_matches_finite_difference():
    channel = RationalChannel.from_poles([-3 + 1j, -0.7], [1 - 2j, 0.4])
    s, h = 0.1 + 2.0j, 1e-6
    numeric = (channel.evaluate(s + h) - channel.evaluate(s - h)) / (2 * h)
    assert channel.derivative(s) == pytest.approx(numeric, rel=1e-7)

def test_static_channel_has_no_derivative():
    channel = StaticChannel(2 - 1j)
    assert channel.evaluate(123j) == 2 - 1j
    assert channel.derivative(123j) == 0

def test_step_gain_keeps_fixed_point():
    channel = RationalChannel.from_poles([-2 + 1j, -7], [1, 3j])
    varpi = ComplexFrequency(0.0, 5.0)
    state = fixed_point_state(channel, varpi)
    advanced = step_gain(state, varpi, channel, 1e-3)
    np.testing.assert_allclose(advanced.as_array(), state.as_array(), rtol=1e-13)

def test_step_gain_analytic_response():
    """a=-1, b=1, varpi=0 from g=0: g(t) = 1 - e^-t."""
    channel = RationalChannel.from_poles([-1], [1])
    state = ChannelGainState((0j,))
    for _ in range(1000):
        state = step_gain(state, 0, channel, 1e-3)
    assert state.total == pytest.approx(1 - math.exp(-1), abs=1e-4)

def test_step_gain_tracks_new_frequency():
    channel = RationalChannel.from_poles([-1], [1])
    state = fixed_point_state(channel, 1j)
    new_varpi = 1.1j
    settle = 5.0 / abs((channel.poles[0] - new_varpi).real)
    dt = 1e-3
    for _ in range(int(settle / dt)):
        state = step_gain(state, new_varpi, channel, dt)
    target = 1 / (new_varpi + 1)
    assert abs(state.total - target) < 0.01 * abs(target)

def test_step_gain_rejects_unstable_step():
    channel = RationalChannel.from_poles([-1000], [1])
    with pytest.raises(IntegrationError):
        step_gain(ChannelGainState((0j,)), 0, channel, 0.01)
    with pytest.raises(IntegrationError):
        step_gain(ChannelGainState((0j,)), 0, channel, 0.0)

def test_fixed_point_equivalence_random_channels():
    """Steady state of the gain ODE equals b/(varpi - a)."""
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = complex(-10 ** rng.uniform(-1, 2), rng.uniform(-5, 5))
        b = complex(rng.normal(), rng.normal())
        varpi = 1j * rng.uniform(-5, 5)
        channel = RationalChannel.from_poles([a], [b])
        rate = abs(a - varpi)
        dt = 1.0 / rate
        steps = int(math.ceil(40.0 * rate / abs(a.real)))
        state = ChannelGainState((0j,))
        for _ in range(steps):
            state = step_gain(state, varpi, channel, dt)
        expected = quasi_static_gain(channel, varpi)
        assert abs(state.total - expected) < 1e-6 * abs(expected)

def test_baseband_filter_examples():
    factor = FirstOrderFactor(-1, 1)
    assert baseband_filter(factor, 1.0, 0) == pytest.approx(1.0)
    assert abs(baseband_filter(factor, 1.0, 1e9)) < 1e-8
    value = baseband_filter(factor, 1.0, 1)
    assert value == pytest.approx((1 + 1j) / (2 + 1j))
    assert abs(value) == pytest.approx(0.6325, abs=1e-4)

def test_baseband_filter_is_low_pass():
    factor = FirstOrderFactor(-3 + 2j, 1)
    for omega in np.linspace(-100, 100, 2001):
        assert abs(baseband_filter(factor, 50.0, 1j * omega)) <= 1 + 1e-12

def test_baseband_filter_pole():
    factor = FirstOrderFactor(-1, 1)
    with pytest.raises(PoleProximityError):
        baseband_filter(factor, 1.0, -(1j + 1))

def test_perturb_gain_matches_quasi_static_derivative():
    factor = FirstOrderFactor(-1, 1)
    omega0 = 1.0
    g0 = 1 / (1 + 1j)
    assert perturb_gain(factor, g0, omega0, 0, 0) == 0
    delta = 0.01j
    predicted = perturb_gain(factor, g0, omega0, delta, 0)
    assert predicted == pytest.approx(-g0 * delta / (1 + 1j))

    channel = RationalChannel([factor])
    centred = (quasi_static_gain(channel, 1j * omega0 + delta)
               - quasi_static_gain(channel, 1j * omega0 - delta)) / 2
    assert abs(predicted - centred) < 1e-3 * abs(centred)

def test_perturb_gain_degenerate_carrier():
    factor = FirstOrderFactor(-1e-12 + 2j, 1)
    with pytest.raises(DegenerateChannelError):
        perturb_gain(factor, 1, 2.0, 0.01j, 0)

def test_perturb_power_examples():
    assert perturb_power(ComplexPower(1 + 2j), 0, 0, 0.3) == 0
    shift = 0.01j
    assert perturb_power(ComplexPower(2 - 1j), shift, shift, 1.0) == pytest.approx(0)
    assert perturb_power(1.0, 0, 0.01j, 1.0) == pytest.approx(0.01j)

def test_perturb_power_second_order_fidelity():
    """Nonlinear change of e^{theta_n} e^{theta_m*} vs. the linear prediction at s=0."""
    theta_n, theta_m = ComplexAngle(0.1, 0.4), ComplexAngle(-0.2, -0.3)
    S0 = complex_power(theta_n, theta_m)
    direction = 0.3 + 1j

    def error(h):
        d = h * direction
        moved = ComplexAngle.from_complex(theta_n.as_complex() + d)
        actual = complex_power(moved, theta_m).value - S0.value
        return abs(actual - perturb_power(S0, 0, d, 1.0))

    errors = [error(h) for h in (1e-2, 5e-3, 2.5e-3)]
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.5 < coarse / fine < 4.5
