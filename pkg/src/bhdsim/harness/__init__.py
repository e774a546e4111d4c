from .config_io import dump_config, load_config, parse_config
from .metrics import MetricsReport, fit_envelope
from .runner import ScenarioResult, calibrate_signal_amplitude, run_scenario
from .scenarios import BUILTIN_SCENARIOS, ScenarioConfig, ThetaMode, get_scenario

__all__ = [
    "BUILTIN_SCENARIOS",
    "MetricsReport",
    "ScenarioConfig",
    "ScenarioResult",
    "ThetaMode",
    "calibrate_signal_amplitude",
    "dump_config",
    "fit_envelope",
    "get_scenario",
    "load_config",
    "parse_config",
    "run_scenario",
]
