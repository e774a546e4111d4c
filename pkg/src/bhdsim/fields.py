"""Sparse optical fields: coherent components at frequency offsets from the carrier.

Amplitudes are in sqrt(photon flux) units; nothing here knows the optical
carrier frequency itself, only signed offsets from it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigError

TWO_PI = 2.0 * math.pi
# components weaker than this are dropped on insert
AMPLITUDE_FLOOR = 1e-15


def wrap_phase(phase: float) -> float:
    """Map a phase onto [0, 2*pi)."""
    p = math.fmod(phase, TWO_PI)
    if p < 0.0:
        p += TWO_PI
    # fmod can round up to exactly 2*pi for tiny negative inputs
    return 0.0 if p >= TWO_PI else p


@dataclass(frozen=True)
class SpectralComponent:
    offset_hz: float
    amplitude: float
    phase_rad: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.amplitude) or self.amplitude < 0.0:
            raise ConfigError(f"amplitude must be finite and >= 0, got {self.amplitude!r}")
        if not math.isfinite(self.offset_hz):
            raise ConfigError(f"offset_hz must be finite, got {self.offset_hz!r}")
        object.__setattr__(self, "phase_rad", wrap_phase(float(self.phase_rad)))

    @property
    def phasor(self) -> complex:
        return cmath.rect(self.amplitude, self.phase_rad)

    @classmethod
    def from_phasor(cls, offset_hz: float, value: complex) -> "SpectralComponent":
        return cls(offset_hz, abs(value), cmath.phase(value))

    def to_record(self) -> dict:
        return {"offset_hz": self.offset_hz, "amplitude": self.amplitude, "phase_rad": self.phase_rad}


@dataclass(frozen=True)
class OpticalField:
    """Immutable set of components, at most one per offset, ordered by offset."""

    components: tuple[SpectralComponent, ...] = ()
    carrier_is_vacuum: bool = True

    def __post_init__(self):
        merged: dict[float, complex] = {}
        for c in self.components:
            merged[c.offset_hz] = merged.get(c.offset_hz, 0j) + c.phasor
        comps = tuple(
            SpectralComponent.from_phasor(off, val)
            for off, val in sorted(merged.items())
            if abs(val) >= AMPLITUDE_FLOOR
        )
        object.__setattr__(self, "components", comps)
        has_carrier = any(c.offset_hz == 0.0 for c in comps)
        object.__setattr__(self, "carrier_is_vacuum", not has_carrier)

    @classmethod
    def vacuum(cls) -> "OpticalField":
        return cls(())

    def with_component(self, component: SpectralComponent) -> "OpticalField":
        """Insert a component, adding phasors if the offset is already occupied."""
        return OpticalField(self.components + (component,))

    def map_phasors(self, fn) -> "OpticalField":
        """Apply ``fn(offset_hz, phasor) -> (offset_hz, phasor)`` to every component."""
        out = []
        for c in self.components:
            off, val = fn(c.offset_hz, c.phasor)
            out.append(SpectralComponent.from_phasor(off, val))
        return OpticalField(tuple(out))

    def phasor_at(self, offset_hz: float) -> complex:
        for c in self.components:
            if c.offset_hz == offset_hz:
                return c.phasor
        return 0j

    @property
    def offsets(self) -> tuple[float, ...]:
        return tuple(c.offset_hz for c in self.components)

    def __len__(self) -> int:
        return len(self.components)

    def to_records(self) -> list[dict]:
        return [c.to_record() for c in self.components]

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "OpticalField":
        return cls(
            tuple(
                SpectralComponent(float(r["offset_hz"]), float(r["amplitude"]), float(r.get("phase_rad", 0.0)))
                for r in records
            )
        )


@dataclass(frozen=True)
class LocalOscillator:
    amplitude: float
    phase_rad: float = 0.0
    # linear phase ramp (rad/s) for scanned-phase measurements
    phase_drift: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.amplitude) or self.amplitude < 0.0:
            raise ConfigError(f"LO amplitude must be finite and >= 0, got {self.amplitude!r}")

    def phase_at(self, t):
        return self.phase_rad + self.phase_drift * t


def total_power(field: OpticalField) -> float:
    return math.fsum(c.amplitude**2 for c in field.components)


def make_two_sideband_field(
    amp_plus: float,
    amp_minus: float,
    omega_plus_hz: float,
    omega_minus_hz: float,
    phi_plus: float = 0.0,
    phi_minus: float = 0.0,
) -> OpticalField:
    """Up sideband at +omega_plus_hz and down sideband at -omega_minus_hz.

    Frequencies are magnitudes; a zero amplitude drops that sideband.
    """
    if amp_plus < 0 or amp_minus < 0:
        raise ConfigError("sideband amplitudes must be >= 0")
    if not (omega_plus_hz > 0 and omega_minus_hz > 0):
        raise ConfigError("sideband frequencies must be > 0 (they are magnitudes)")
    comps = []
    if amp_plus > 0:
        comps.append(SpectralComponent(omega_plus_hz, amp_plus, phi_plus))
    if amp_minus > 0:
        comps.append(SpectralComponent(-omega_minus_hz, amp_minus, phi_minus))
    return OpticalField(tuple(comps))
