"""Scenario pipeline: calibration -> locking -> optics -> detection -> analyzer -> metrics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .. import analyzer as sa
from ..detection import DetectionConfig, PhaseTrack, STRONG_LO_RATIO, difference_photocurrent
from ..errors import ConfigError, StageError
from ..fields import LocalOscillator, OpticalField
from ..lock import (
    GeneratorState,
    LockState,
    free_running,
    method1_state,
    method2_state,
)
from ..optics import AomConfig, SidebandSource
from .. import rng
from .metrics import MetricsReport, compute_metrics
from .scenarios import ScenarioConfig, ThetaMode


def calibrate_signal_amplitude(
    target_snr_db: float, analyzer: sa.AnalyzerConfig, lo_amplitude: float, n_sidebands: int = 1
) -> float:
    """Sideband amplitude giving ``target_snr_db`` for a single sideband at this RBW.

    Tone power (2 A a)^2 / 2 over floor A^2 * ENBW gives a = sqrt(snr * ENBW / 2);
    ``n_sidebands`` only enters the strong-LO check.
    """
    if not math.isfinite(target_snr_db) or target_snr_db <= 0:
        raise ConfigError(f"target SNR must be a positive finite dB value, got {target_snr_db!r}")
    amp = math.sqrt(10.0 ** (target_snr_db / 10.0) * analyzer.enbw_hz / 2.0)
    if lo_amplitude**2 < STRONG_LO_RATIO * n_sidebands * amp**2:
        raise ConfigError(
            f"target {target_snr_db:g} dB needs sideband amplitude {amp:.4g}, "
            f"outside the strong-LO regime for LO amplitude {lo_amplitude:.4g}"
        )
    return amp


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    traces: dict
    report: MetricsReport
    lock: LockState
    signal_amplitude: float

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for label, trace in self.traces.items():
            trace.to_csv(out / f"trace_{label}.csv")
        (out / "report.json").write_text(json.dumps(self.report.to_dict(), indent=2, sort_keys=True) + "\n")
        from .config_io import dump_config

        (out / "config.ini").write_text(dump_config(self.config))
        return out


def _stage(name):
    """Run a callable, re-raising any failure tagged with the stage name."""

    def call(fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except StageError:
            raise
        except Exception as exc:  # noqa: BLE001 - tag and re-raise
            raise StageError(name, exc) from exc

    return call


def _generators(cfg: ScenarioConfig, s: float):
    f1 = cfg.aom1_hz * s
    d = cfg.generator_phase_noise * math.sqrt(s) if cfg.lock == "method1" else 0.0
    g1 = GeneratorState(f1, 0.0, d, controllable=False)
    g2 = GeneratorState(f1 + cfg.omega_plus_hz * s + cfg.gen2_offset_hz * s, 0.0, d)
    g3 = GeneratorState(f1 - cfg.omega_minus_hz * s + cfg.gen3_offset_hz * s, 0.0, d)
    return g1, g2, g3


def _lock_state(cfg: ScenarioConfig, s: float, measure_s: float) -> LockState:
    g1, g2, g3 = _generators(cfg, s)
    if cfg.lock == "none":
        return free_running(g1, g2, g3)
    pll = cfg.pll.scaled(s)
    if cfg.lock == "method1":
        return method1_state(g1, g2, g3, pll, cfg.settle_time_s / s, measure_s, cfg.seed)
    return method2_state(g1, g2, g3, cfg.jitter_rad, pll.update_rate_hz, measure_s, cfg.seed)


def _source(lock: LockState, cfg: ScenarioConfig, arm_plus: float, arm_minus: float) -> SidebandSource:
    eff = cfg.aom_efficiency
    return SidebandSource(
        aom1=AomConfig(-lock.gen1.freq_hz, eff, lock.gen1.phase_rad),
        aom2=AomConfig(lock.gen2.freq_hz, eff, lock.gen2.phase_rad),
        aom3=AomConfig(lock.gen3.freq_hz, eff, lock.gen3.phase_rad),
        fiber_transmission=cfg.fiber_transmission,
        arm_plus=arm_plus,
        arm_minus=arm_minus,
    )


def build_signal(lock: LockState, cfg: ScenarioConfig, amp_plus: float, amp_minus: float) -> OpticalField:
    """Drive the AOM chain so the sidebands arrive with the requested amplitudes."""
    unit = _source(lock, cfg, 1.0, 1.0).propagate(OpticalField.from_records([{"offset_hz": 0.0, "amplitude": 1.0}]))
    g_plus = abs(unit.phasor_at(lock.omega_plus_hz))
    g_minus = abs(unit.phasor_at(-lock.omega_minus_hz))
    need = [amp_plus / g_plus, amp_minus / g_minus]
    laser = max(need)
    arms = [(n / laser) ** 2 for n in need]
    src = _source(lock, cfg, *arms)
    return src.propagate(OpticalField.from_records([{"offset_hz": 0.0, "amplitude": laser}]))


def _lo_phase(signal: OpticalField, theta: float) -> float:
    """LO phase that puts the beat at homodyne phase ``theta``."""
    phases = [c.phase_rad for c in signal.components]
    if len(phases) == 2:
        # theta_eff = theta_lo - (phi_up + phi_down) / 2
        return theta + 0.5 * sum(phases)
    return theta + phases[0]


def _phase_tracks(lock: LockState, signal: OpticalField):
    if lock.psi_plus_dev is None:
        return None
    tracks = []
    for c in signal.components:
        if c.offset_hz > 0:
            tracks.append(PhaseTrack(0.0, lock.rate_hz, lock.psi_plus_dev))
        else:
            # down field phase is -psi_minus
            tracks.append(PhaseTrack(0.0, lock.rate_hz, -lock.psi_minus_dev))
    return tracks


@dataclass
class Measurement:
    label: str
    detection: DetectionConfig


@dataclass
class Plan:
    analyzer: sa.AnalyzerConfig
    signal_amplitude: float
    lock: LockState
    measurements: list


def plan_measurements(cfg: ScenarioConfig) -> Plan:
    """Everything up to detection: calibrated amplitude, lock state, one detection config per trace."""
    s = cfg.frequency_scale
    lo_amp = cfg.lo_amplitude
    an = cfg.analyzer.scaled(s)
    # 0 dB is the shot-noise floor in this RBW
    an = replace(an, reference_power=lo_amp**2 * an.enbw_hz)
    fs = cfg.sample_rate_hz * s
    duration = an.sweep_time_s

    n_sb = 2 if cfg.two_sidebands else 1
    a_s = _stage("calibration")(calibrate_signal_amplitude, cfg.target_snr_db, an, lo_amp, n_sb)
    lock = _stage("phase_lock")(_lock_state, cfg, s, duration)

    jobs = []  # (label, amp_plus, amp_minus, theta mode)
    if cfg.include_shot:
        jobs.append(("shot", 0.0, 0.0, cfg.theta_modes[0]))
    if cfg.two_sidebands:
        if cfg.include_single:
            jobs.append(("single", cfg.single_amplitude, 0.0, ThetaMode()))
        for mode in cfg.theta_modes:
            jobs.append((f"double_{mode.label}", cfg.amp_plus, cfg.amp_minus, mode))
    else:
        jobs.append(("single", cfg.amp_plus, cfg.amp_minus, cfg.theta_modes[0]))

    measurements = []
    for label, ap, am, mode in jobs:
        if ap == 0 and am == 0:
            signal = OpticalField.vacuum()
        else:
            signal = _stage("optics")(build_signal, lock, cfg, ap * a_s, am * a_s)
        theta0 = mode.value if mode.kind == "fixed" else 0.0
        drift = mode.value * s if mode.kind == "scan" else 0.0
        lo = LocalOscillator(lo_amp, _lo_phase(signal, theta0) if len(signal) else theta0, drift)
        det = _stage("detection")(
            DetectionConfig,
            lo=lo,
            signal=signal,
            duration_s=duration,
            sample_rate_hz=fs,
            visibility=cfg.visibility,
            noise_enabled=cfg.noise_enabled,
            seed=cfg.seed,
            stream=rng.stream_id(label),
            phase_tracks=_phase_tracks(lock, signal),
        )
        measurements.append(Measurement(label, det))
    return Plan(an, a_s, lock, measurements)


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> ScenarioResult:
    """Run one scenario end to end; optionally write traces, report and config echo."""
    plan = plan_measurements(cfg)
    an = plan.analyzer
    measure = sa.zero_span if an.span_hz == 0 else sa.sweep
    traces = {}
    for m in plan.measurements:
        ts = _stage("detection")(difference_photocurrent, m.detection)
        traces[m.label] = _stage("analyzer")(measure, ts, an)
        del ts

    report = _stage("metrics")(compute_metrics, cfg, traces, plan.lock, plan.signal_amplitude, an)
    result = ScenarioResult(cfg, traces, report, plan.lock, plan.signal_amplitude)
    if out_dir is not None:
        _stage("output")(result.write, out_dir)
    return result
