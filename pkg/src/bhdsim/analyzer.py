"""Swept-tuned spectrum analyzer emulation.

Chain per tuning frequency: Gaussian RBW bandpass (complex-demodulated and
decimated in one polyphase step), power envelope, single-pole video filter
at VBW, detector, dB display.  Powers are calibrated so a tone of peak
amplitude A reads A**2/2 and white noise of one-sided PSD N0 reads N0*ENBW.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, replace
from typing import Literal

import numpy as np
from scipy import signal

from .detection import TimeSeries
from .errors import ConfigError

# ENBW / (-3 dB width) for a Gaussian power response
GAUSSIAN_ENBW_FACTOR = math.sqrt(math.pi / math.log(2.0)) / 2.0  # 1.0645
# taps extend this many impulse-response sigmas either side
_TAP_SIGMAS = 4.5


def enbw(rbw_hz: float) -> float:
    return GAUSSIAN_ENBW_FACTOR * rbw_hz


def rbw_power_response(delta_hz, rbw_hz: float):
    """|H|^2 of the RBW filter at ``delta_hz`` from the tuned frequency."""
    return np.exp(-4.0 * math.log(2.0) * (np.asarray(delta_hz) / rbw_hz) ** 2)


@dataclass(frozen=True)
class AnalyzerConfig:
    center_hz: float
    span_hz: float = 0.0
    rbw_hz: float = 100e3
    vbw_hz: float = 300.0
    sweep_time_s: float = 0.5
    points: int = 1001
    detector: Literal["sample", "average"] = "sample"
    # linear power displayed as 0 dB
    reference_power: float = 1.0

    def __post_init__(self):
        if self.span_hz < 0:
            raise ConfigError("span_hz must be >= 0")
        if not (self.rbw_hz > 0 and self.vbw_hz > 0 and self.sweep_time_s > 0):
            raise ConfigError("rbw_hz, vbw_hz and sweep_time_s must be > 0")
        if self.points < 2:
            raise ConfigError("points must be >= 2")
        if self.detector not in ("sample", "average"):
            raise ConfigError(f"unknown detector {self.detector!r}")
        if not self.reference_power > 0:
            raise ConfigError("reference_power must be > 0")
        if self.vbw_hz > self.rbw_hz:
            raise ConfigError("vbw_hz must not exceed rbw_hz")
        if self.span_hz > 0:
            if self.rbw_hz > self.span_hz:
                raise ConfigError("rbw_hz must not exceed a nonzero span")
            if self.span_hz / (self.points - 1) > self.rbw_hz / 10.0:
                warnings.warn("fewer than 10 display points per RBW", stacklevel=3)

    @property
    def enbw_hz(self) -> float:
        return enbw(self.rbw_hz)

    def scaled(self, factor: float) -> "AnalyzerConfig":
        """Same measurement with frequencies times ``factor`` and times divided by it."""
        return replace(
            self,
            center_hz=self.center_hz * factor,
            span_hz=self.span_hz * factor,
            rbw_hz=self.rbw_hz * factor,
            vbw_hz=self.vbw_hz * factor,
            sweep_time_s=self.sweep_time_s / factor,
            reference_power=self.reference_power * factor,
        )


@dataclass(frozen=True)
class Trace:
    x: np.ndarray
    y_db: np.ndarray
    config: AnalyzerConfig

    @property
    def power(self) -> np.ndarray:
        """Displayed values as linear power."""
        return self.config.reference_power * 10.0 ** (self.y_db / 10.0)

    def to_csv(self, path) -> None:
        xname = "time_s" if self.config.span_hz == 0 else "freq_hz"
        lines = [f"# {k} = {v}" for k, v in asdict(self.config).items()]
        lines.append(f"{xname},y_db")
        lines.extend(f"{x:.12g},{y:.9f}" for x, y in zip(self.x, self.y_db))
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "Trace":
        meta, rows = {}, []
        with open(path) as fh:
            for line in fh:
                if line.startswith("#"):
                    k, _, v = line[1:].partition("=")
                    meta[k.strip()] = v.strip()
                elif line[0].isdigit() or line[0] in "+-.":
                    rows.append([float(s) for s in line.split(",")])
        cfg = AnalyzerConfig(
            center_hz=float(meta["center_hz"]),
            span_hz=float(meta["span_hz"]),
            rbw_hz=float(meta["rbw_hz"]),
            vbw_hz=float(meta["vbw_hz"]),
            sweep_time_s=float(meta["sweep_time_s"]),
            points=int(meta["points"]),
            detector=meta["detector"],
            reference_power=float(meta["reference_power"]),
        )
        data = np.asarray(rows)
        return cls(data[:, 0], data[:, 1], cfg)


def gaussian_taps(sample_rate_hz: float, rbw_hz: float) -> np.ndarray:
    """Unit-DC-gain Gaussian low-pass whose power response is -3 dB at rbw_hz/2."""
    sigma_t = math.sqrt(math.log(2.0)) / (math.pi * rbw_hz)
    half = max(1, int(math.ceil(_TAP_SIGMAS * sigma_t * sample_rate_hz)))
    t = np.arange(-half, half + 1) / sample_rate_hz
    h = np.exp(-0.5 * (t / sigma_t) ** 2)
    return h / h.sum()


def decimation_factor(sample_rate_hz: float, rbw_hz: float) -> int:
    # keep the decimated rate >= 4 x RBW; Gaussian skirts there are < -48 dB
    return max(1, int(sample_rate_hz // (4.0 * rbw_hz)))


def rbw_filter(z: np.ndarray, sample_rate_hz: float, rbw_hz: float) -> np.ndarray:
    """Gaussian RBW low-pass on a complex baseband series (centered, same length)."""
    if rbw_hz / 2.0 >= sample_rate_hz / 2.0:
        raise ConfigError("RBW is above the Nyquist limit of the baseband series")
    h = gaussian_taps(sample_rate_hz, rbw_hz)
    return signal.oaconvolve(np.asarray(z, dtype=complex), h, mode="same")


def _bandpass_envelope(x: np.ndarray, fs: float, f_tune: float, rbw_hz: float, trim: bool):
    """Power envelope 2|y|^2 of the RBW channel at ``f_tune``, decimated.

    Returns (sample indices of envelope points, envelope). With ``trim`` only
    fully overlapped output points are kept.
    """
    h = gaussian_taps(fs, rbw_hz)
    half = (len(h) - 1) // 2
    dec = decimation_factor(fs, rbw_hz)
    k = np.arange(-half, half + 1)
    # demodulate-then-filter equals filtering with modulated taps; the
    # remaining exp(-i w n) factor drops out of |y|^2
    w = 2.0 * math.pi * f_tune / fs
    hr = h * np.cos(w * k)
    hi = h * np.sin(w * k)
    yr = signal.upfirdn(hr, x, down=dec)
    yi = signal.upfirdn(hi, x, down=dec)
    env = 2.0 * (yr * yr + yi * yi)
    centers = np.arange(len(env)) * dec - half
    if trim:
        keep = (centers - half >= 0) & (centers + half < len(x))
    else:
        keep = (centers >= 0) & (centers < len(x))
    return centers[keep], env[keep]


def _video_filter(env: np.ndarray, env_rate: float, vbw_hz: float, init: float) -> np.ndarray:
    a = 1.0 - math.exp(-2.0 * math.pi * vbw_hz / env_rate)
    y, _ = signal.lfilter([a], [1.0, a - 1.0], env, zi=[(1.0 - a) * init])
    return y


def _to_db(power: np.ndarray, ref: float) -> np.ndarray:
    tiny = np.finfo(float).tiny
    return 10.0 * np.log10(np.maximum(power, tiny) / ref)


def zero_span(ts: TimeSeries, cfg: AnalyzerConfig) -> Trace:
    """Power in the RBW channel at ``center_hz`` versus time."""
    fs = ts.sample_rate_hz
    if cfg.center_hz >= fs / 2.0:
        raise ConfigError(f"center {cfg.center_hz:.6g} Hz is above Nyquist {fs / 2:.6g} Hz")
    n_sweep = int(round(cfg.sweep_time_s * fs))
    if len(ts) < n_sweep:
        raise ConfigError(f"input is {ts.duration_s:.6g} s long; sweep needs {cfg.sweep_time_s:.6g} s")
    x = ts.samples[:n_sweep]
    centers, env = _bandpass_envelope(x, fs, cfg.center_hz, cfg.rbw_hz, trim=True)
    env_rate = fs / decimation_factor(fs, cfg.rbw_hz)
    # start the video filter settled at the early mean level
    n_init = max(1, min(len(env), int(env_rate / cfg.vbw_hz)))
    video = _video_filter(env, env_rate, cfg.vbw_hz, float(np.mean(env[:n_init])))
    # display point i covers envelope samples in [edges[i], edges[i+1])
    edges = np.searchsorted(centers, np.linspace(0, n_sweep, cfg.points + 1))
    if np.any(np.diff(edges) == 0):
        raise ConfigError("too many display points for the RBW-limited envelope rate")
    if cfg.detector == "sample":
        vals = video[edges[1:] - 1]
    else:
        vals = np.add.reduceat(video, edges[:-1]) / np.diff(edges)
    x_t = ts.t0_s + np.arange(1, cfg.points + 1) * (cfg.sweep_time_s / cfg.points)
    return Trace(x_t, _to_db(vals, cfg.reference_power), cfg)


def sweep_frequencies(cfg: AnalyzerConfig) -> np.ndarray:
    frac = np.arange(cfg.points) / (cfg.points - 1) - 0.5
    return cfg.center_hz + cfg.span_hz * frac


def sweep(ts: TimeSeries, cfg: AnalyzerConfig) -> Trace:
    """Swept measurement: display bin k is tuned to its frequency during time slice k.

    Bins are independent; each video filter starts settled at its slice mean.
    """
    if cfg.span_hz <= 0:
        raise ConfigError("sweep needs span_hz > 0; use zero_span for span 0")
    fs = ts.sample_rate_hz
    freqs = sweep_frequencies(cfg)
    if freqs[-1] >= fs / 2.0:
        raise ConfigError(f"sweep stop {freqs[-1]:.6g} Hz is above Nyquist {fs / 2:.6g} Hz")
    n_sweep = int(round(cfg.sweep_time_s * fs))
    if len(ts) < n_sweep:
        raise ConfigError(f"input is {ts.duration_s:.6g} s long; sweep needs {cfg.sweep_time_s:.6g} s")
    bounds = np.linspace(0, n_sweep, cfg.points + 1).astype(np.int64)
    env_rate = fs / decimation_factor(fs, cfg.rbw_hz)
    vals = np.empty(cfg.points)
    for i, f in enumerate(freqs):
        seg = ts.samples[bounds[i] : bounds[i + 1]]
        _, env = _bandpass_envelope(seg, fs, f, cfg.rbw_hz, trim=True)
        if len(env) == 0:
            raise ConfigError("sweep slices are shorter than the RBW filter response")
        video = _video_filter(env, env_rate, cfg.vbw_hz, float(np.mean(env)))
        vals[i] = video[-1] if cfg.detector == "sample" else float(np.mean(video))
    return Trace(freqs, _to_db(vals, cfg.reference_power), cfg)


def marker_power(trace: Trace, freq_hz: float, window_rbw: float = 1.5) -> tuple[float, float]:
    """Tone and floor power at ``freq_hz`` from a fit of the RBW shape to a swept trace.

    Least squares of ``S * R(f - freq_hz) + N`` over bins within
    ``window_rbw`` RBWs. Returns linear (S, N).
    """
    cfg = trace.config
    sel = np.abs(trace.x - freq_hz) <= window_rbw * cfg.rbw_hz
    if sel.sum() < 3:
        raise ConfigError("too few trace points around the marker for an RBW fit")
    r = rbw_power_response(trace.x[sel] - freq_hz, cfg.rbw_hz)
    a = np.column_stack([r, np.ones_like(r)])
    (s, n), *_ = np.linalg.lstsq(a, trace.power[sel], rcond=None)
    return float(s), float(n)
