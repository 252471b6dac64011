"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An input broke a documented precondition (e.g. an unnormalized state)."""


class CalibrationError(RuntimeError):
    """A lock calibration sweep did not contain a usable fringe."""


class ConfigError(ValueError):
    """Invalid configuration; carries the offending key path."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
