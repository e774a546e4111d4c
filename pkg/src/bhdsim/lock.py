"""Sideband frequency/phase locking of the three AOM drive generators.

Generator 1 drives the down-shifting AOM; generators 2 and 3 make the up and
down sidebands.  The electrical beat phases are

    psi_plus  = phi2 - phi1   (up sideband at f2 - f1)
    psi_minus = phi1 - phi3   (down sideband at f1 - f3)

and the homodyne phase entering cos^2 is ``theta_lo + (psi_minus - psi_plus) / 2``.

Method 1 closes two PLLs (mixer + ideal phase detector, single-pole LPF,
velocity-form PID on the generator frequency).  Method 2 derives all three
generators from one clock, which pins the frequency relations exactly and
leaves only per-generator jitter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import rng
from .detection import TimeSeries
from .errors import ConfigError
from .fields import LocalOscillator, wrap_phase

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GeneratorState:
    freq_hz: float
    phase_rad: float = 0.0
    # free-running phase diffusion; per-update increment std is this * sqrt(dt)
    phase_noise_std_rad_per_sqrt_hz: float = 0.0
    controllable: bool = True

    def __post_init__(self):
        if not self.freq_hz > 0:
            raise ConfigError(f"generator frequency must be > 0, got {self.freq_hz!r}")
        if self.phase_noise_std_rad_per_sqrt_hz < 0:
            raise ConfigError("phase noise strength must be >= 0")


@dataclass(frozen=True)
class PllConfig:
    reference_hz: float = 5e6
    lpf_cutoff_hz: float = 20e3
    # dimensionless per-update gains; the output is a phase step per update
    kp: float = 0.3
    ki: float = 0.03
    kd: float = 0.0
    update_rate_hz: float = 100e3
    settle_threshold_rad: float = 0.5

    def __post_init__(self):
        if not all(math.isfinite(g) for g in (self.kp, self.ki, self.kd)):
            raise ConfigError("PID gains must be finite")
        if not self.update_rate_hz > 2.0 * self.lpf_cutoff_hz:
            raise ConfigError("update_rate_hz must exceed 2 x lpf_cutoff_hz")
        if not (self.reference_hz > 0 and self.lpf_cutoff_hz > 0 and self.settle_threshold_rad > 0):
            raise ConfigError("reference, LPF cutoff and settle threshold must be > 0")

    @property
    def lpf_coefficient(self) -> float:
        return 1.0 - math.exp(-TWO_PI * self.lpf_cutoff_hz / self.update_rate_hz)

    def scaled(self, factor: float) -> "PllConfig":
        return replace(
            self,
            reference_hz=self.reference_hz * factor,
            lpf_cutoff_hz=self.lpf_cutoff_hz * factor,
            update_rate_hz=self.update_rate_hz * factor,
        )


@dataclass(frozen=True)
class LockResult:
    locked: bool
    settle_time_s: float
    residual_phase_std_rad: float
    phase_error_series: TimeSeries
    diagnostics: str = ""


def closed_loop_poles(cfg: PllConfig) -> np.ndarray:
    """Poles (in z) of the linearized loop: integrator plant, LPF, PID."""
    P = np.polynomial.polynomial
    beta = cfg.lpf_coefficient
    d = np.array([1.0, -1.0])  # 1 - z^-1
    lhs = P.polymul(P.polymul(d, d), [1.0, -(1.0 - beta)])
    pid = P.polyadd(P.polyadd(cfg.kp * d, [cfg.ki]), cfg.kd * P.polymul(d, d))
    char = P.polyadd(lhs, beta * P.polymul([0.0, 1.0], pid))
    # ascending powers of z^-1 are descending powers of z
    return np.roots(char)


def is_stable(cfg: PllConfig) -> bool:
    return bool(np.max(np.abs(closed_loop_poles(cfg))) < 1.0 - 1e-9)


def loop_time_constant(cfg: PllConfig) -> float:
    """Slowest-mode decay time in updates (inf when not stable)."""
    r = float(np.max(np.abs(closed_loop_poles(cfg))))
    return -1.0 / math.log(r) if r < 1.0 else math.inf


def mix_down(f1_hz: float, f2_hz: float, phi1: float, phi2: float) -> tuple[float, float]:
    """Low-passed mixer product of two tones: (|f1 - f2|, phase of that tone).

    The phase is taken higher-minus-lower so the returned tone is
    cos(2 pi |f1 - f2| t + phase).
    """
    if f1_hz == f2_hz:
        raise ConfigError("mixer inputs have equal frequency; the product is DC")
    if f1_hz > f2_hz:
        return f1_hz - f2_hz, phi1 - phi2
    return f2_hz - f1_hz, phi2 - phi1


def _wrap_pm(x):
    return (x + math.pi) % TWO_PI - math.pi


def _settle_index(err: np.ndarray, threshold: float, window: int) -> Optional[int]:
    """First index after which the rolling RMS stays below ``threshold``."""
    if len(err) < window:
        return None
    c = np.concatenate([[0.0], np.cumsum(err * err)])
    rms = np.sqrt(np.maximum(c[window:] - c[:-window], 0.0) / window)
    above = np.nonzero(rms >= threshold)[0]
    if len(above) == 0:
        return 0
    last = int(above[-1]) + 1
    return None if last >= len(rms) else last + window - 1


def _run_loop(
    offset_hz: float,
    phase0: float,
    noise: np.ndarray,
    cfg: PllConfig,
) -> np.ndarray:
    """One PLL on the mixed-down beat. Returns the phase error per update.

    ``offset_hz`` is the free-running beat frequency minus the reference,
    ``phase0`` the initial beat phase minus the reference phase, and
    ``noise`` the per-update phase increments the loop must reject.
    """
    n = len(noise)
    dt = 1.0 / cfg.update_rate_hz
    drift = TWO_PI * offset_hz * dt
    kp, ki, kd, beta = cfg.kp, cfg.ki, cfg.kd, cfg.lpf_coefficient
    err = np.empty(n)
    psi = phase0
    y = y1 = y2 = 0.0
    u = 0.0
    e_prev = 0.0
    for i in range(n):
        pd = (psi + math.pi) % TWO_PI - math.pi
        err[i] = pd
        y2, y1 = y1, y
        y = y + beta * (pd - y)
        e = -y
        # velocity form, derivative on the measurement
        u += kp * (e - e_prev) + ki * e - kd * (y - 2.0 * y1 + y2)
        e_prev = e
        psi += drift + u + noise[i]
    return err


def _diffusion(seed: int, label: str, strength: float, n: int, dt: float) -> np.ndarray:
    if strength == 0.0:
        return np.zeros(n)
    return strength * math.sqrt(dt) * rng.standard_normal(seed, rng.stream_id(label), 0, n)


def _lock_result(err: np.ndarray, cfg: PllConfig, stable: bool) -> LockResult:
    rate = cfg.update_rate_hz
    tau = loop_time_constant(cfg)
    window = max(16, int(math.ceil(4.0 * tau))) if math.isfinite(tau) else 16
    idx = _settle_index(err, cfg.settle_threshold_rad, window)
    series = TimeSeries(rate, err)
    notes = []
    if not stable:
        notes.append("closed loop is not stable for these gains")
    if idx is None:
        notes.append("phase error never settled below threshold")
    # steady-state window: after settling and no earlier than half the run
    start = max(idx if idx is not None else 0, len(err) // 2)
    tail = err[start:]
    slipped = bool(np.any(np.abs(np.diff(tail)) > math.pi))
    if slipped:
        notes.append("cycle slip after settling")
    locked = stable and idx is not None and not slipped
    return LockResult(
        locked=locked,
        settle_time_s=(idx / rate) if idx is not None else math.inf,
        residual_phase_std_rad=float(np.sqrt(np.mean(tail * tail))),
        phase_error_series=series,
        diagnostics="; ".join(notes),
    )


def pll_lock_method1(
    gen1: GeneratorState,
    gen2: GeneratorState,
    gen3: GeneratorState,
    cfg: PllConfig,
    duration_s: float,
    seed: int,
) -> tuple[LockResult, LockResult]:
    """Lock f2 - f1 and f1 - f3 to the shared reference with two independent PLLs.

    Never raises on failure to lock; see ``LockResult.locked``/``diagnostics``.
    """
    if not (gen2.controllable and gen3.controllable):
        raise ConfigError("method 1 needs generators 2 and 3 to be controllable")
    n = int(round(duration_s * cfg.update_rate_hz))
    if n < 2:
        raise ConfigError("duration is shorter than two loop updates")
    dt = 1.0 / cfg.update_rate_hz
    w1 = _diffusion(seed, "gen1", gen1.phase_noise_std_rad_per_sqrt_hz, n, dt)
    w2 = _diffusion(seed, "gen2", gen2.phase_noise_std_rad_per_sqrt_hz, n, dt)
    w3 = _diffusion(seed, "gen3", gen3.phase_noise_std_rad_per_sqrt_hz, n, dt)
    stable = is_stable(cfg)
    results = []
    for gen, w in ((gen2, w2), (gen3, w3)):
        f_beat, phase = mix_down(gen.freq_hz, gen1.freq_hz, gen.phase_rad, gen1.phase_rad)
        # sign with which this generator's phase enters its beat
        s = 1.0 if gen.freq_hz > gen1.freq_hz else -1.0
        err = _run_loop(f_beat - cfg.reference_hz, phase, s * (w - w1), cfg)
        results.append(_lock_result(err, cfg, stable))
    return results[0], results[1]


def lock_method2(
    gen1: GeneratorState,
    gen2: GeneratorState,
    gen3: GeneratorState,
    residual_jitter_rad: float = 0.0,
) -> tuple[GeneratorState, GeneratorState, GeneratorState]:
    """Slave generators 2 and 3 to generator 1's clock.

    The sideband frequency becomes the mean of the two requested ones and is
    applied symmetrically, so the two beat frequencies are equal by
    construction.  Phases are kept; ``residual_jitter_rad`` is recorded as the
    remaining white phase jitter of the slaved generators.
    """
    if residual_jitter_rad < 0:
        raise ConfigError("residual_jitter_rad must be >= 0")
    omega = 0.5 * ((gen2.freq_hz - gen1.freq_hz) + (gen1.freq_hz - gen3.freq_hz))
    if omega <= 0:
        raise ConfigError("generator 2 must sit above generator 1 and generator 3 below it")
    jitter = dict(phase_noise_std_rad_per_sqrt_hz=0.0, controllable=False)
    g1 = replace(gen1, phase_noise_std_rad_per_sqrt_hz=0.0)
    g2 = replace(gen2, freq_hz=gen1.freq_hz + omega, **jitter)
    g3 = replace(gen3, freq_hz=gen1.freq_hz - omega, **jitter)
    return g1, g2, g3


def method2_jitter(
    residual_jitter_rad: float, rate_hz: float, duration_s: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """White phase jitter series of generators 2 and 3 at ``rate_hz``."""
    n = max(2, int(round(duration_s * rate_hz)))
    if residual_jitter_rad == 0.0:
        return np.zeros(n), np.zeros(n)
    j2 = residual_jitter_rad * rng.standard_normal(seed, rng.stream_id("jitter2"), 0, n)
    j3 = residual_jitter_rad * rng.standard_normal(seed, rng.stream_id("jitter3"), 0, n)
    return j2, j3


@dataclass(frozen=True)
class LockState:
    """Generator settings plus beat-phase deviations over a measurement window.

    ``psi_plus_dev``/``psi_minus_dev`` are sampled at ``rate_hz`` starting at
    t = 0 of the measurement; ``None`` means static.
    """

    method: str
    gen1: GeneratorState
    gen2: GeneratorState
    gen3: GeneratorState
    rate_hz: float = 1.0
    psi_plus_dev: Optional[np.ndarray] = None
    psi_minus_dev: Optional[np.ndarray] = None
    results: tuple = ()

    @property
    def omega_plus_hz(self) -> float:
        return self.gen2.freq_hz - self.gen1.freq_hz

    @property
    def omega_minus_hz(self) -> float:
        return self.gen1.freq_hz - self.gen3.freq_hz

    @property
    def delta_omega_hz(self) -> float:
        return self.omega_plus_hz - self.omega_minus_hz

    @property
    def psi_plus(self) -> float:
        return self.gen2.phase_rad - self.gen1.phase_rad

    @property
    def psi_minus(self) -> float:
        return self.gen1.phase_rad - self.gen3.phase_rad

    @property
    def residual_phase_std_rad(self) -> float:
        if not self.results:
            return 0.0
        return max(r.residual_phase_std_rad for r in self.results)


def sideband_phase_to_theta(lock: LockState, lo: LocalOscillator) -> float:
    """Static homodyne phase in [0, pi) set by the LO and the generator phases.

    Power goes as cos^2 of this, up to a constant from fixed optical path
    phases (the splitter reflections add pi to the down sideband).
    """
    if lock.delta_omega_hz != 0.0:
        raise ConfigError(
            f"sideband frequencies differ by {lock.delta_omega_hz:.6g} Hz; theta is not static"
        )
    theta = lo.phase_rad + 0.5 * (lock.psi_minus - lock.psi_plus)
    return wrap_phase(theta) % math.pi


def free_running(gen1: GeneratorState, gen2: GeneratorState, gen3: GeneratorState) -> LockState:
    return LockState("none", gen1, gen2, gen3)


def method1_state(
    gen1: GeneratorState,
    gen2: GeneratorState,
    gen3: GeneratorState,
    cfg: PllConfig,
    settle_s: float,
    measure_s: float,
    seed: int,
) -> LockState:
    """Run both loops, then keep the last ``measure_s`` seconds as the lock state.

    Locked generators sit exactly at f1 +/- reference with the reference phase.
    """
    r_plus, r_minus = pll_lock_method1(gen1, gen2, gen3, cfg, settle_s + measure_s, seed)
    n = int(round(measure_s * cfg.update_rate_hz)) + 1
    g2 = replace(gen2, freq_hz=gen1.freq_hz + cfg.reference_hz, phase_rad=gen1.phase_rad)
    g3 = replace(gen3, freq_hz=gen1.freq_hz - cfg.reference_hz, phase_rad=gen1.phase_rad)
    return LockState(
        "method1",
        gen1,
        g2,
        g3,
        rate_hz=cfg.update_rate_hz,
        psi_plus_dev=r_plus.phase_error_series.samples[-n:],
        psi_minus_dev=r_minus.phase_error_series.samples[-n:],
        results=(r_plus, r_minus),
    )


def method2_state(
    gen1: GeneratorState,
    gen2: GeneratorState,
    gen3: GeneratorState,
    residual_jitter_rad: float,
    rate_hz: float,
    measure_s: float,
    seed: int,
) -> LockState:
    g1, g2, g3 = lock_method2(gen1, gen2, gen3, residual_jitter_rad)
    j2, j3 = method2_jitter(residual_jitter_rad, rate_hz, measure_s, seed)
    # psi_plus picks up +j2, psi_minus picks up -j3
    results = tuple(
        LockResult(True, 0.0, float(np.sqrt(np.mean(j * j))), TimeSeries(rate_hz, j)) for j in (j2, -j3)
    )
    if residual_jitter_rad == 0.0:
        return LockState("method2", g1, g2, g3, rate_hz, None, None, results)
    return LockState("method2", g1, g2, g3, rate_hz, j2, -j3, results)
