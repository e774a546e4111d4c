"""Passive optical elements: AOM frequency shifters, beam splitters, losses.

Beam splitters use the symmetric convention (factor i on reflection).
Visibility is not applied to fields; it is a scalar handed to detection.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ConfigError
from .fields import OpticalField, SpectralComponent

DEFAULT_AOM_EFFICIENCY = 0.70


@dataclass(frozen=True)
class AomConfig:
    """Single-order AOM.

    ``shift_hz`` is signed (negative for the -1 diffraction order).
    ``phase_rad`` is the RF drive phase; it is imprinted with the sign of the order.
    """

    shift_hz: float
    efficiency: float = DEFAULT_AOM_EFFICIENCY
    phase_rad: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.efficiency <= 1.0):
            raise ConfigError(f"AOM efficiency must be in (0, 1], got {self.efficiency!r}")


@dataclass(frozen=True)
class SplitterConfig:
    reflectance: float = 0.5
    visibility: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.reflectance <= 1.0):
            raise ConfigError(f"reflectance must be in [0, 1], got {self.reflectance!r}")
        if not (0.0 <= self.visibility <= 1.0):
            raise ConfigError(f"visibility must be in [0, 1], got {self.visibility!r}")


def aom_shift(field: OpticalField, cfg: AomConfig) -> OpticalField:
    gain = math.sqrt(cfg.efficiency)
    sign = 1.0 if cfg.shift_hz >= 0 else -1.0
    rot = cmath.rect(gain, sign * cfg.phase_rad)
    return field.map_phasors(lambda off, val: (off + cfg.shift_hz, val * rot))


def beamsplitter_mix(
    a: OpticalField, b: OpticalField, cfg: SplitterConfig
) -> tuple[OpticalField, OpticalField]:
    """Lossless two-port mixing applied independently at every offset."""
    t = math.sqrt(1.0 - cfg.reflectance)
    r = 1j * math.sqrt(cfg.reflectance)
    out1, out2 = [], []
    for off in sorted(set(a.offsets) | set(b.offsets)):
        va, vb = a.phasor_at(off), b.phasor_at(off)
        out1.append(SpectralComponent.from_phasor(off, t * va + r * vb))
        out2.append(SpectralComponent.from_phasor(off, r * va + t * vb))
    return OpticalField(tuple(out1)), OpticalField(tuple(out2))


def attenuate(field: OpticalField, transmission: float) -> OpticalField:
    if not (0.0 <= transmission <= 1.0):
        raise ConfigError(f"transmission must be in [0, 1], got {transmission!r}")
    g = math.sqrt(transmission)
    return field.map_phasors(lambda off, val: (off, val * g))


@dataclass(frozen=True)
class SidebandSource:
    """The AOM1 -> split -> (AOM2 | AOM3) -> BS1 -> fiber chain that makes the signal.

    ``arm_plus``/``arm_minus`` are extra power transmissions in each arm
    (0 blocks the arm, which gives the single-sideband configuration).
    """

    aom1: AomConfig
    aom2: AomConfig
    aom3: AomConfig
    splitter: SplitterConfig = SplitterConfig()
    combiner: SplitterConfig = SplitterConfig()
    fiber_transmission: float = 1.0
    arm_plus: float = 1.0
    arm_minus: float = 1.0

    def elements(self) -> list[dict]:
        """Element records in propagation order, for config echo."""
        return [
            {"kind": "aom", "name": "aom1", **_aom_record(self.aom1)},
            {"kind": "splitter", "name": "split", "reflectance": self.splitter.reflectance},
            {"kind": "attenuator", "name": "arm_plus", "transmission": self.arm_plus},
            {"kind": "aom", "name": "aom2", **_aom_record(self.aom2)},
            {"kind": "attenuator", "name": "arm_minus", "transmission": self.arm_minus},
            {"kind": "aom", "name": "aom3", **_aom_record(self.aom3)},
            {"kind": "splitter", "name": "bs1", "reflectance": self.combiner.reflectance},
            {"kind": "attenuator", "name": "fiber", "transmission": self.fiber_transmission},
        ]

    def propagate(self, laser: OpticalField) -> OpticalField:
        shifted = aom_shift(laser, self.aom1)
        arm_a, arm_b = beamsplitter_mix(shifted, OpticalField.vacuum(), self.splitter)
        up = aom_shift(attenuate(arm_a, self.arm_plus), self.aom2)
        down = aom_shift(attenuate(arm_b, self.arm_minus), self.aom3)
        out, _ = beamsplitter_mix(up, down, self.combiner)
        return attenuate(out, self.fiber_transmission)


def _aom_record(cfg: AomConfig) -> dict:
    return {"shift_hz": cfg.shift_hz, "efficiency": cfg.efficiency, "phase_rad": cfg.phase_rad}
