"""Balanced difference photocurrent: LO-signal beat notes plus shot noise.

Normalization: the shot noise has a flat one-sided PSD of ``lo.amplitude**2``
per Hz, and a component of amplitude ``a`` produces a beat of peak amplitude
``2 * lo.amplitude * a``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import rng
from .errors import ConfigError, NyquistError
from .fields import LocalOscillator, OpticalField, total_power

DEFAULT_SAMPLE_RATE = 32e6
# LO power must exceed signal power by this factor
STRONG_LO_RATIO = 100.0


@dataclass(frozen=True)
class TimeSeries:
    sample_rate_hz: float
    samples: np.ndarray
    t0_s: float = 0.0

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ConfigError("sample_rate_hz must be > 0")
        if len(self.samples) == 0:
            raise ConfigError("time series must not be empty")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    @property
    def times(self) -> np.ndarray:
        return self.t0_s + np.arange(len(self.samples)) / self.sample_rate_hz

    def __add__(self, other: "TimeSeries") -> "TimeSeries":
        if other.sample_rate_hz != self.sample_rate_hz or len(other) != len(self) or other.t0_s != self.t0_s:
            raise ConfigError("time series grids differ")
        return TimeSeries(self.sample_rate_hz, self.samples + other.samples, self.t0_s)


@dataclass(frozen=True)
class PhaseTrack:
    """Extra phase (rad) on a uniform time grid, linearly interpolated."""

    t0_s: float
    rate_hz: float
    values: np.ndarray

    def at(self, t: np.ndarray) -> np.ndarray:
        grid = self.t0_s + np.arange(len(self.values)) / self.rate_hz
        return np.interp(t, grid, self.values)


@dataclass(frozen=True)
class DetectionConfig:
    lo: LocalOscillator
    signal: OpticalField
    duration_s: float
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE
    visibility: float = 1.0
    noise_enabled: bool = True
    seed: int = 0
    # separate noise streams for separate measurements under one seed
    stream: int = 0
    t0_s: float = 0.0
    # optional time-dependent phase per signal component (same order)
    phase_tracks: Optional[Sequence[Optional[PhaseTrack]]] = None
    # one-sided PSD of additive electronic noise, per Hz
    electronic_noise_psd: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.visibility <= 1.0):
            raise ConfigError("visibility must be in [0, 1]")
        if not self.duration_s > 0:
            raise ConfigError("duration_s must be > 0")
        if not self.sample_rate_hz > 0:
            raise ConfigError("sample_rate_hz must be > 0")
        if self.electronic_noise_psd < 0:
            raise ConfigError("electronic_noise_psd must be >= 0")
        p_sig = total_power(self.signal)
        if p_sig > 0 and self.lo.amplitude**2 < STRONG_LO_RATIO * p_sig:
            raise ConfigError(
                f"strong-LO regime violated: LO power {self.lo.amplitude**2:.4g} < "
                f"{STRONG_LO_RATIO:g} x signal power {p_sig:.4g}"
            )
        if self.phase_tracks is not None and len(self.phase_tracks) != len(self.signal):
            raise ConfigError("phase_tracks must align with signal components")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))


def _check_nyquist(cfg: DetectionConfig) -> None:
    nyq = cfg.sample_rate_hz / 2.0
    for c in cfg.signal.components:
        if abs(c.offset_hz) >= nyq:
            raise NyquistError(
                f"beat at offset {c.offset_hz:.9g} Hz is not below Nyquist ({nyq:.9g} Hz)"
            )


def beat_signal(cfg: DetectionConfig, start: int = 0, stop: Optional[int] = None) -> TimeSeries:
    """Deterministic beat-note part of the difference current.

    Each component contributes ``2 A V a_k cos(2 pi f_k t + phi_k - theta(t))``
    with the signed offset ``f_k``; for a down sideband this is
    ``cos(2 pi |f_k| t - phi_k + theta)``, the +theta pairing of the two-beat form.
    """
    _check_nyquist(cfg)
    stop = cfg.n_samples if stop is None else stop
    fs = cfg.sample_rate_hz
    n = np.arange(start, stop, dtype=float)
    t = None
    if cfg.lo.phase_drift != 0.0 or cfg.phase_tracks is not None:
        t = cfg.t0_s + n / fs
    out = np.zeros(len(n))
    scale = 2.0 * cfg.lo.amplitude * cfg.visibility
    for k, c in enumerate(cfg.signal.components):
        # whole cycles are dropped before scaling to radians so long traces stay accurate
        arg = n * (c.offset_hz / fs)
        arg -= np.floor(arg)
        arg *= 2.0 * math.pi
        arg += 2.0 * math.pi * math.fmod(c.offset_hz * cfg.t0_s, 1.0) + c.phase_rad - cfg.lo.phase_rad
        if cfg.lo.phase_drift != 0.0:
            arg -= cfg.lo.phase_drift * t
        if cfg.phase_tracks is not None and cfg.phase_tracks[k] is not None:
            arg += cfg.phase_tracks[k].at(t)
        np.cos(arg, out=arg)
        arg *= scale * c.amplitude
        out += arg
    return TimeSeries(fs, out, cfg.t0_s + start / fs)


def shot_noise_sigma(lo_amplitude: float, sample_rate_hz: float, extra_psd: float = 0.0) -> float:
    """Per-sample std of white noise with one-sided PSD ``lo_amplitude**2 + extra_psd``."""
    return math.sqrt((lo_amplitude**2 + extra_psd) * sample_rate_hz / 2.0)


def shot_noise(cfg: DetectionConfig, start: int = 0, stop: Optional[int] = None) -> TimeSeries:
    """White Gaussian shot noise (plus optional electronic noise), reproducible per seed."""
    stop = cfg.n_samples if stop is None else stop
    sigma = shot_noise_sigma(cfg.lo.amplitude, cfg.sample_rate_hz, cfg.electronic_noise_psd)
    if sigma == 0.0:
        samples = np.zeros(stop - start)
    else:
        samples = sigma * rng.standard_normal(cfg.seed, cfg.stream, start, stop)
    return TimeSeries(cfg.sample_rate_hz, samples, cfg.t0_s + start / cfg.sample_rate_hz)


def difference_photocurrent(cfg: DetectionConfig, start: int = 0, stop: Optional[int] = None) -> TimeSeries:
    """i1 - i2 of the balanced pair: beat notes plus, if enabled, shot noise."""
    beat = beat_signal(cfg, start, stop)
    if not cfg.noise_enabled:
        return beat
    noise = shot_noise(cfg, start, stop)
    np.add(noise.samples, beat.samples, out=noise.samples)
    return noise


# ---- serialization ----

_MAGIC = b"BHDTS\x00"
_VERSION = 1
# magic, version u16, sample rate f64, t0 f64, length u64; samples follow as <f8
_HEADER = struct.Struct("<6sHddQ")


def write_csv(ts: TimeSeries, path) -> None:
    data = np.column_stack([ts.times, ts.samples])
    np.savetxt(path, data, delimiter=",", header="time_s,value", comments="", fmt="%.17g")


def read_csv(path) -> TimeSeries:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    t, v = data[:, 0], data[:, 1]
    fs = 1.0 / float(np.mean(np.diff(t))) if len(t) > 1 else 1.0
    return TimeSeries(fs, v, float(t[0]))


def write_binary(ts: TimeSeries, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, ts.sample_rate_hz, ts.t0_s, len(ts)))
        fh.write(np.ascontiguousarray(ts.samples, dtype="<f8").tobytes())


def read_binary(path) -> TimeSeries:
    raw = Path(path).read_bytes()
    magic, version, fs, t0, n = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != _VERSION:
        raise ConfigError(f"{path}: not a time-series block (magic={magic!r}, version={version})")
    samples = np.frombuffer(raw, dtype="<f8", count=n, offset=_HEADER.size).copy()
    return TimeSeries(fs, samples, t0)
