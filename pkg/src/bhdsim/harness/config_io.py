"""INI-style scenario files.

Sections and keys mirror ScenarioConfig; every key is optional.  A
``base`` key in [scenario] starts from a built-in scenario::

    [scenario]
    base = fig6_single
    seed = 3

    [analyzer]
    vbw_hz = 100

Theta modes are a comma-separated list of ``fixed:<rad>`` / ``scan:<rad per s>``.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import fields, replace
from pathlib import Path

from ..analyzer import AnalyzerConfig
from ..errors import ConfigError
from ..lock import PllConfig
from .scenarios import BUILTIN_SCENARIOS, ScenarioConfig, ThetaMode

_SECTIONS = {
    "scenario": (
        "name", "description", "lock", "theta_modes", "lo_amplitude", "visibility", "target_snr_db",
        "noise_enabled", "seed", "frequency_scale", "sample_rate_hz", "include_single",
        "include_shot", "single_amplitude",
    ),
    "sidebands": ("amp_plus", "amp_minus", "omega_plus_hz", "omega_minus_hz"),
    "optics": ("aom1_hz", "aom_efficiency", "fiber_transmission"),
    "lock": ("generator_phase_noise", "gen2_offset_hz", "gen3_offset_hz", "settle_time_s", "jitter_rad"),
}
_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _convert(value: str, typ, key: str):
    typ = str(typ)
    try:
        if typ == "bool":
            low = value.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if typ == "int":
            return int(value)
        if typ == "float":
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value.strip()


def config_to_dict(cfg: ScenarioConfig) -> dict:
    out = {}
    for section, keys in _SECTIONS.items():
        sec = {}
        for k in keys:
            v = getattr(cfg, k)
            sec[k] = ", ".join(str(m) for m in v) if k == "theta_modes" else v
        out[section] = sec
    out["analyzer"] = {f.name: getattr(cfg.analyzer, f.name) for f in fields(AnalyzerConfig)}
    out["pll"] = {f.name: getattr(cfg.pll, f.name) for f in fields(PllConfig)}
    return out


def dump_config(cfg: ScenarioConfig) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    for section, values in config_to_dict(cfg).items():
        parser[section] = {k: repr(v) if isinstance(v, float) else str(v) for k, v in values.items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    known = set(_SECTIONS) | {"analyzer", "pll"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"{source}: unknown section(s) {sorted(unknown)}")

    base_name = parser.get("scenario", "base", fallback=None)
    if base_name is not None:
        if base_name not in BUILTIN_SCENARIOS:
            raise ConfigError(f"{source}: unknown base scenario {base_name!r}")
        cfg = BUILTIN_SCENARIOS[base_name]
    else:
        name = parser.get("scenario", "name", fallback=None)
        if name is None:
            raise ConfigError(f"{source}: [scenario] needs 'name' or 'base'")
        cfg = ScenarioConfig(name=name)

    kw = {}
    for section, keys in _SECTIONS.items():
        if not parser.has_section(section):
            continue
        for key, value in parser.items(section):
            if key == "base":
                continue
            if key not in keys:
                raise ConfigError(f"{source}: unknown key [{section}] {key}")
            if key == "theta_modes":
                kw[key] = tuple(ThetaMode.parse(t) for t in value.split(",") if t.strip())
            else:
                kw[key] = _convert(value, _TYPES[key], key)

    for section, cls, attr in (("analyzer", AnalyzerConfig, "analyzer"), ("pll", PllConfig, "pll")):
        if not parser.has_section(section):
            continue
        types = {f.name: f.type for f in fields(cls)}
        sub = {}
        for key, value in parser.items(section):
            if key not in types:
                raise ConfigError(f"{source}: unknown key [{section}] {key}")
            sub[key] = _convert(value, types[key], key)
        kw[attr] = replace(getattr(cfg, attr), **sub)

    try:
        return replace(cfg, **kw)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, str(p))
