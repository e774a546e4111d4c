"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Invalid configuration or argument values."""


class NyquistError(ConfigError):
    """A beat frequency is at or above the Nyquist limit of the sample grid."""


class SimulationError(RuntimeError):
    """A simulation stage failed for reasons other than bad input."""


class StageError(RuntimeError):
    """Wraps a failure inside a scenario pipeline stage.

    ``stage`` names where it happened; ``cause`` is the original exception.
    """

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
