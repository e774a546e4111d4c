"""Metrics extracted from analyzer traces.

Levels are in dB relative to the display reference (the shot-noise floor at
the scenario's RBW).  ``peak_power_db`` is the beat-tone power with the noise
floor removed, so ``snr_db = peak_power_db - floor_db`` is a tone-to-noise
ratio.  Envelope extremes are displayed levels (tone plus noise).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from ..analyzer import Trace, marker_power

_TINY = 1e-30


def db(x: float) -> float:
    return 10.0 * math.log10(max(x, _TINY))


@dataclass(frozen=True)
class EnvelopeFit:
    freq_hz: float
    mean: float
    amplitude: float

    @property
    def period_s(self) -> float:
        return 1.0 / self.freq_hz

    @property
    def maximum(self) -> float:
        return self.mean + self.amplitude

    @property
    def minimum(self) -> float:
        return self.mean - self.amplitude


def _sinusoid_ls(t, p, f):
    a = np.column_stack([np.ones_like(t), np.cos(2 * np.pi * f * t), np.sin(2 * np.pi * f * t)])
    coef, *_ = np.linalg.lstsq(a, p, rcond=None)
    return coef, float(np.sum((a @ coef - p) ** 2))


def fit_envelope(t: np.ndarray, p: np.ndarray) -> EnvelopeFit:
    """Fit ``c0 + R cos(2 pi f t + phi)`` to a linear-power zero-span trace.

    A cos^2 envelope is exactly of this form. The frequency starts at the
    largest non-DC FFT bin and is refined within one bin by least squares.
    """
    t = np.asarray(t, float)
    p = np.asarray(p, float)
    dt = float(np.mean(np.diff(t)))
    n_fft = 16 * len(p)
    spec = np.abs(np.fft.rfft(p - p.mean(), n_fft))
    freqs = np.fft.rfftfreq(n_fft, dt)
    span = t[-1] - t[0]
    lo_bin = np.searchsorted(freqs, 0.5 / span)
    k = lo_bin + int(np.argmax(spec[lo_bin:]))
    f0 = freqs[k]
    df = 1.0 / span
    res = optimize.minimize_scalar(
        lambda f: _sinusoid_ls(t, p, f)[1],
        bounds=(max(f0 - df, 0.25 / span), f0 + df),
        method="bounded",
        options={"xatol": 1e-9 * f0},
    )
    coef, _ = _sinusoid_ls(t, p, res.x)
    return EnvelopeFit(float(res.x), float(coef[0]), float(math.hypot(coef[1], coef[2])))


def modulation_amplitude(trace: Trace, freq_hz: float) -> float:
    """Amplitude of the linear-power trace's Fourier component at ``freq_hz``."""
    p = trace.power
    t = trace.x
    return float(2.0 * abs(np.mean(p * np.exp(-2j * np.pi * freq_hz * t))))


@dataclass
class MetricsReport:
    scenario: str
    seed: int
    frequency_scale: float
    peak_power_db: Optional[float]
    floor_db: Optional[float]
    snr_db: Optional[float]
    single_sideband_db: Optional[float] = None
    gain_over_single_db: Optional[float] = None
    # simulated time units, and the same period at lab scale
    envelope_period_s: Optional[float] = None
    envelope_period_lab_s: Optional[float] = None
    envelope_max_db: Optional[float] = None
    envelope_min_db: Optional[float] = None
    theta_extinction_db: Optional[float] = None
    signal_amplitude: float = 0.0
    lock: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _level(trace: Trace, center_hz: float, modulated: bool, scale: float) -> dict:
    """Displayed level of one trace; swept traces also get the fitted tone and floor."""
    if trace.config.span_hz > 0:
        ref = trace.config.reference_power
        s, n = marker_power(trace, center_hz)
        return {"level_db": db((s + n) / ref), "tone_db": db(s / ref), "trace_floor_db": db(n / ref)}
    p = trace.power / trace.config.reference_power
    out = {"level_db": db(float(np.mean(p)))}
    if modulated:
        fit = fit_envelope(trace.x - trace.x[0], p)
        out.update(
            period_s=fit.period_s,
            period_lab_s=fit.period_s * scale,
            max_db=db(fit.maximum),
            min_db=db(fit.minimum),
        )
    return out


def _tone_db(rec: dict, floor_db: Optional[float]) -> float:
    """Tone power of a trace record: fitted for swept traces, floor-subtracted for zero span."""
    if "tone_db" in rec:
        return rec["tone_db"]
    shown = rec.get("max_db", rec["level_db"])
    if floor_db is None:
        return shown
    return db(10.0 ** (shown / 10.0) - 10.0 ** (floor_db / 10.0))


def _modulated(cfg, label: str, lock) -> bool:
    if label == "shot" or label == "single":
        return False
    if label.endswith("scan"):
        return True
    return cfg.lock == "none" and lock.delta_omega_hz != 0.0


def compute_metrics(cfg, traces: dict, lock, signal_amplitude: float, analyzer) -> MetricsReport:
    per = {}
    for label, tr in traces.items():
        per[label] = _level(tr, analyzer.center_hz, _modulated(cfg, label, lock), cfg.frequency_scale)

    floor = per["shot"]["level_db"] if "shot" in per and cfg.noise_enabled else None
    doubles = [k for k in traces if k.startswith("double_")]
    primary = doubles[0] if doubles else "single"
    prim = per[primary]
    peak = _tone_db(prim, floor)
    single = _tone_db(per["single"], floor) if "single" in per else None

    extinction = None
    if "double_theta0" in per and "double_theta90" in per:
        extinction = per["double_theta0"]["level_db"] - per["double_theta90"]["level_db"]
    elif "max_db" in prim:
        extinction = prim["max_db"] - prim["min_db"]

    from .config_io import config_to_dict

    return MetricsReport(
        scenario=cfg.name,
        seed=cfg.seed,
        frequency_scale=cfg.frequency_scale,
        peak_power_db=peak,
        floor_db=floor,
        snr_db=peak - floor if floor is not None else None,
        single_sideband_db=single,
        gain_over_single_db=(peak - single) if single is not None and primary != "single" else None,
        envelope_period_s=prim.get("period_s"),
        envelope_period_lab_s=prim.get("period_lab_s"),
        envelope_max_db=prim.get("max_db"),
        envelope_min_db=prim.get("min_db"),
        theta_extinction_db=extinction,
        signal_amplitude=signal_amplitude,
        lock={
            "method": lock.method,
            "omega_plus_hz": lock.omega_plus_hz,
            "omega_minus_hz": lock.omega_minus_hz,
            "residual_phase_std_rad": lock.residual_phase_std_rad,
            "locked": all(r.locked for r in lock.results) if lock.results else None,
            "settle_time_s": max((r.settle_time_s for r in lock.results), default=None),
        },
        traces=per,
        config=config_to_dict(cfg),
    )
