import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from bhdsim.detection import DetectionConfig, beat_signal
from bhdsim.errors import ConfigError
from bhdsim.fields import LocalOscillator, OpticalField, SpectralComponent
from bhdsim.lock import (
    GeneratorState,
    LockState,
    PllConfig,
    _lock_result,
    _run_loop,
    closed_loop_poles,
    free_running,
    is_stable,
    lock_method2,
    loop_time_constant,
    method1_state,
    method2_state,
    mix_down,
    pll_lock_method1,
    sideband_phase_to_theta,
)
from bhdsim.optics import AomConfig, SidebandSource

CFG = PllConfig()


def gens(df2=0.0, df3=0.0, noise=0.0, p1=0.0, p2=0.0, p3=0.0):
    return (
        GeneratorState(110e6, p1, noise),
        GeneratorState(115e6 + df2, p2, noise),
        GeneratorState(105e6 + df3, p3, noise),
    )


def test_mix_down_examples():
    assert mix_down(115e6, 110e6, 0.0, 0.0) == (5e6, 0.0)
    assert mix_down(110e6, 105e6, 0.0, 0.0) == (5e6, 0.0)
    assert mix_down(115e6, 110e6, math.pi / 3, math.pi / 6) == pytest.approx((5e6, math.pi / 6))
    assert mix_down(115e6, 110e6, 0.3, 0.1) == pytest.approx((5e6, 0.2))
    assert mix_down(110e6, 105e6, 0.1, 0.4) == pytest.approx((5e6, -0.3))
    assert mix_down(105e6, 110e6, 0.4, 0.1) == pytest.approx((5e6, -0.3))
    with pytest.raises(ConfigError):
        mix_down(1e6, 1e6, 0.0, 0.0)


def test_default_loop_is_stable():
    assert is_stable(CFG)
    assert np.max(np.abs(closed_loop_poles(CFG))) == pytest.approx(0.804, abs=0.01)
    assert 3.0 < loop_time_constant(CFG) < 6.0


def test_noiseless_lock_converges():
    r_plus, r_minus = pll_lock_method1(*gens(df2=500.0, df3=-300.0, p2=2.0), CFG, 0.02, seed=0)
    tau = loop_time_constant(CFG) / CFG.update_rate_hz
    for r in (r_plus, r_minus):
        assert r.locked, r.diagnostics
        assert r.residual_phase_std_rad < 1e-9
        assert r.settle_time_s < 100 * tau


def test_open_loop_does_not_lock():
    cfg = PllConfig(kp=0.0, ki=0.0)
    r_plus, _ = pll_lock_method1(*gens(df2=1e3), cfg, 0.02, seed=0)
    assert not r_plus.locked
    assert r_plus.diagnostics


def test_unstable_gains_do_not_lock():
    cfg = PllConfig(kp=6.0, ki=0.5)
    assert not is_stable(cfg)
    r_plus, _ = pll_lock_method1(*gens(df2=1e3), cfg, 0.02, seed=0)
    assert not r_plus.locked
    assert "not stable" in r_plus.diagnostics


def test_noisy_lock_has_finite_residual():
    r_plus, r_minus = pll_lock_method1(*gens(df2=200.0, noise=15.0), CFG, 0.05, seed=1)
    for r in (r_plus, r_minus):
        assert r.locked, r.diagnostics
        assert 0.01 < r.residual_phase_std_rad < CFG.settle_threshold_rad


def test_lock_is_seeded():
    a = pll_lock_method1(*gens(noise=15.0), CFG, 0.01, seed=4)[0].phase_error_series.samples
    b = pll_lock_method1(*gens(noise=15.0), CFG, 0.01, seed=4)[0].phase_error_series.samples
    c = pll_lock_method1(*gens(noise=15.0), CFG, 0.01, seed=5)[0].phase_error_series.samples
    assert np.array_equal(a, b) and not np.array_equal(a, c)


@given(
    st.floats(min_value=0.0, max_value=2.0),
    st.floats(min_value=0.0, max_value=0.6),
    st.floats(min_value=0.0, max_value=0.6),
)
def test_stable_poles_imply_decay(kp, ki, kd):
    cfg = PllConfig(kp=kp, ki=ki, kd=kd)
    r = float(np.max(np.abs(closed_loop_poles(cfg))))
    assume(r < 0.99 or r > 1.01)
    err = _run_loop(0.0, 0.05, np.zeros(3000), cfg)
    blocks = np.abs(err).reshape(30, 100).max(axis=1)
    if r < 0.99:
        assert blocks[-1] <= 0.05 * blocks[0] + 1e-12
    else:
        assert not _lock_result(err, cfg, is_stable(cfg)).locked


def test_method2_pins_frequencies():
    g1, g2, g3 = lock_method2(*gens(df2=3.0, df3=1.0))
    assert g2.freq_hz - g1.freq_hz == g1.freq_hz - g3.freq_hz == 5e6 + 1.0
    assert not g2.controllable and not g3.controllable
    with pytest.raises(ConfigError):
        lock_method2(*gens(), residual_jitter_rad=-1.0)


def test_method2_flicker_bounded_by_jitter():
    """At the quadrature null, leftover power fraction is the mean of sin^2 of the phase wobble."""
    sigma = 0.05
    state = method2_state(*gens(), sigma, 1e4, 1.0, seed=3)
    wobble = 0.5 * (state.psi_minus_dev - state.psi_plus_dev)
    leak = np.mean(np.sin(wobble) ** 2)
    assert leak <= sigma**2
    assert leak == pytest.approx(sigma**2 / 2, rel=0.1)
    assert state.delta_omega_hz == 0.0


def test_method2_without_jitter_is_static():
    state = method2_state(*gens(df2=7.0), 0.0, 1e4, 0.1, seed=0)
    assert state.psi_plus_dev is None
    assert state.residual_phase_std_rad == 0.0


def test_method1_state_measures_tail():
    state = method1_state(*gens(df2=100.0, noise=15.0), CFG, 0.01, 0.01, seed=0)
    assert state.delta_omega_hz == 0.0
    assert len(state.psi_plus_dev) == 1001
    assert 0.0 < state.residual_phase_std_rad < 0.5


@pytest.mark.parametrize(
    "theta_lo,p2,p3,expected",
    [
        (0.0, 0.0, 0.0, 0.0),
        (math.pi / 4, -math.pi / 4, -math.pi / 4, math.pi / 2),
        (math.pi / 2, 0.0, 0.0, math.pi / 2),
        (0.0, 0.6, 0.0, math.pi - 0.3),
    ],
)
def test_sideband_phase_to_theta(theta_lo, p2, p3, expected):
    state = free_running(*gens(p2=p2, p3=p3))
    theta = sideband_phase_to_theta(state, LocalOscillator(1.0, theta_lo))
    assert theta == pytest.approx(expected)


def _detected_theta(phases):
    """Offset c in P(theta_lo) ~ cos^2(theta_lo + c), from beat power through the AOM chain."""
    f1, f2, f3 = 11e3, 11.5e3, 10.5e3
    p1, p2, p3 = phases
    src = SidebandSource(AomConfig(-f1, 1.0, p1), AomConfig(f2, 1.0, p2), AomConfig(f3, 1.0, p3))
    sig = src.propagate(OpticalField((SpectralComponent(0.0, 1.0),)))

    def power(theta_lo):
        c = DetectionConfig(LocalOscillator(100.0, theta_lo), sig, 0.1, 64e3, noise_enabled=False)
        return np.mean(beat_signal(c).samples ** 2)

    p0, p45, p90 = power(0.0), power(math.pi / 4), power(math.pi / 2)
    total = p0 + p90
    return 0.5 * math.atan2(1.0 - 2.0 * p45 / total, (p0 - p90) / total)


@given(st.lists(st.floats(min_value=0.0, max_value=2 * math.pi), min_size=6, max_size=6))
def test_theta_tracks_detected_power(ph):
    """Predicted theta and the measured cos^2 offset differ by the same constant for any phases."""
    offsets = []
    for phases in (ph[:3], ph[3:]):
        g = (GeneratorState(11e3, phases[0]), GeneratorState(11.5e3, phases[1]), GeneratorState(10.5e3, phases[2]))
        pred = sideband_phase_to_theta(free_running(*g), LocalOscillator(1.0, 0.0))
        offsets.append(_detected_theta(phases) - pred)
    d = (offsets[0] - offsets[1]) % math.pi
    assert min(d, math.pi - d) < 1e-6
    # the fixed path offset is the pi on the down sideband, i.e. pi/2 in theta
    d = (offsets[0] - math.pi / 2) % math.pi
    assert min(d, math.pi - d) < 1e-6


def test_theta_needs_equal_sideband_frequencies():
    with pytest.raises(ConfigError):
        sideband_phase_to_theta(free_running(*gens(df2=1.0)), LocalOscillator(1.0))


def test_config_validation():
    with pytest.raises(ConfigError):
        PllConfig(update_rate_hz=30e3, lpf_cutoff_hz=20e3)
    with pytest.raises(ConfigError):
        PllConfig(kp=math.nan)
    with pytest.raises(ConfigError):
        GeneratorState(0.0)
    with pytest.raises(ConfigError):
        pll_lock_method1(*lock_method2(*gens()), CFG, 0.01, 0)
    scaled = CFG.scaled(0.01)
    assert scaled.lpf_coefficient == pytest.approx(CFG.lpf_coefficient)
    assert isinstance(free_running(*gens()), LockState)
