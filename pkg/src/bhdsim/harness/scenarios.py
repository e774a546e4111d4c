"""Scenario configuration and the built-in figure reproductions.

All frequencies, rates and times in a ScenarioConfig are lab-scale values;
``frequency_scale`` is applied when the scenario is run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

from ..analyzer import AnalyzerConfig
from ..errors import ConfigError
from ..lock import PllConfig

LockMethod = Literal["none", "method1", "method2"]


@dataclass(frozen=True)
class ThetaMode:
    """Fixed homodyne phase (``value`` in rad) or a linear scan (``value`` in rad/s)."""

    kind: Literal["fixed", "scan"] = "fixed"
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fixed", "scan"):
            raise ConfigError(f"theta mode must be 'fixed' or 'scan', got {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "scan":
            return "scan"
        return f"theta{round(math.degrees(self.value)) % 360:d}"

    def __str__(self) -> str:
        return f"{self.kind}:{self.value!r}"

    @classmethod
    def parse(cls, text: str) -> "ThetaMode":
        kind, _, value = text.strip().partition(":")
        try:
            return cls(kind.strip(), float(value) if value else 0.0)
        except ValueError as exc:
            raise ConfigError(f"bad theta mode {text!r}") from exc


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    description: str = ""
    # sideband amplitudes relative to the calibrated single-sideband amplitude
    amp_plus: float = 1.0
    amp_minus: float = 1.0
    omega_plus_hz: float = 5e6
    omega_minus_hz: float = 5e6
    aom1_hz: float = 110e6
    aom_efficiency: float = 0.70
    fiber_transmission: float = 0.5
    lock: LockMethod = "none"
    theta_modes: tuple[ThetaMode, ...] = (ThetaMode(),)
    lo_amplitude: float = 1e6
    visibility: float = 1.0
    target_snr_db: float = 12.0
    analyzer: AnalyzerConfig = AnalyzerConfig(center_hz=5e6)
    noise_enabled: bool = True
    seed: int = 0
    frequency_scale: float = 1.0
    sample_rate_hz: float = 32e6
    include_single: bool = True
    include_shot: bool = True
    # amplitude of the reference single-sideband trace
    single_amplitude: float = 1.0
    pll: PllConfig = PllConfig()
    generator_phase_noise: float = 15.0
    gen2_offset_hz: float = 0.0
    gen3_offset_hz: float = 0.0
    settle_time_s: float = 0.02
    jitter_rad: float = 0.01

    def __post_init__(self):
        if not self.frequency_scale > 0:
            raise ConfigError("frequency_scale must be > 0")
        if self.lock not in ("none", "method1", "method2"):
            raise ConfigError(f"unknown lock method {self.lock!r}")
        if self.amp_plus < 0 or self.amp_minus < 0 or self.single_amplitude < 0:
            raise ConfigError("sideband amplitudes must be >= 0")
        if self.amp_plus == 0 and self.amp_minus == 0:
            raise ConfigError("at least one sideband must be on")
        if not self.theta_modes:
            raise ConfigError("need at least one theta mode")
        if not (0 <= self.visibility <= 1):
            raise ConfigError("visibility must be in [0, 1]")
        if not self.lo_amplitude > 0:
            raise ConfigError("lo_amplitude must be > 0")
        if not (0 < self.aom_efficiency <= 1 and 0 < self.fiber_transmission <= 1):
            raise ConfigError("efficiencies/transmissions must be in (0, 1]")

    @property
    def two_sidebands(self) -> bool:
        return self.amp_plus > 0 and self.amp_minus > 0

    def with_overrides(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)


ZERO_SPAN = AnalyzerConfig(center_hz=5e6, span_hz=0.0, rbw_hz=100e3, vbw_hz=300.0, sweep_time_s=0.5)
SWEPT = AnalyzerConfig(center_hz=5e6, span_hz=3e6, rbw_hz=100e3, vbw_hz=30.0, sweep_time_s=0.5)
# LO phase scan: cos^2 period of 0.1 s at lab scale
SCAN_RATE = 10.0 * math.pi


def _fig2(tag: str, delta_hz: float) -> ScenarioConfig:
    # AOM1/AOM2 fixed, AOM3 retuned: omega_minus = omega_plus - delta
    return ScenarioConfig(
        name=f"fig2{tag}",
        description=f"zero span, two free-running sidebands, delta = {delta_hz:+g} Hz",
        omega_plus_hz=5e6,
        omega_minus_hz=5e6 - delta_hz,
        lock="none",
        analyzer=ZERO_SPAN,
    )


def _builtins() -> dict[str, ScenarioConfig]:
    out = {}
    for tag, delta in zip("abcde", (-10.0, -5.0, 0.0, 5.0, 10.0)):
        out[f"fig2{tag}"] = _fig2(tag, delta)
    out["fig5a"] = ScenarioConfig(
        name="fig5a",
        description="zero span, PLL-locked sidebands: theta 0, theta pi/2, scanned",
        lock="method1",
        theta_modes=(ThetaMode("fixed", 0.0), ThetaMode("fixed", math.pi / 2), ThetaMode("scan", SCAN_RATE)),
        analyzer=ZERO_SPAN,
    )
    for suffix, mode in (
        ("theta0", ThetaMode("fixed", 0.0)),
        ("theta90", ThetaMode("fixed", math.pi / 2)),
        ("scan", ThetaMode("scan", SCAN_RATE)),
    ):
        out[f"fig5b_{suffix}"] = ScenarioConfig(
            name=f"fig5b_{suffix}",
            description=f"zero span, clock-synchronized sidebands, {mode.label}",
            lock="method2",
            theta_modes=(mode,),
            analyzer=ZERO_SPAN,
        )
    out["fig6_single"] = ScenarioConfig(
        name="fig6_single",
        description="swept 3.5-6.5 MHz, single sideband (heterodyne)",
        amp_minus=0.0,
        lock="method2",
        analyzer=SWEPT,
        include_single=False,
    )
    for suffix, theta in (("theta0", 0.0), ("theta90", math.pi / 2)):
        out[f"fig6_double_{suffix}"] = ScenarioConfig(
            name=f"fig6_double_{suffix}",
            description=f"swept 3.5-6.5 MHz, two locked sidebands (homodyne), theta = {math.degrees(theta):g} deg",
            lock="method2",
            theta_modes=(ThetaMode("fixed", theta),),
            analyzer=SWEPT,
            include_single=False,
        )
    return out


BUILTIN_SCENARIOS: dict[str, ScenarioConfig] = _builtins()


def get_scenario(name: str, **overrides) -> ScenarioConfig:
    try:
        base = BUILTIN_SCENARIOS[name]
    except KeyError:
        raise ConfigError(
            f"unknown scenario {name!r}; built-ins: {', '.join(BUILTIN_SCENARIOS)}"
        ) from None
    return replace(base, **overrides) if overrides else base
