"""Exception hierarchy for the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(SimulationError):
    """Invalid configuration or parameter set.

    Carries the full list of violated rules so the CLI can report all of them.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ContractViolation(SimulationError):
    """A documented precondition of an operation was broken by the caller."""


class DomainError(SimulationError, ValueError):
    """Mathematically invalid input (negative variance, non-positive distance...)."""


class OutputError(SimulationError):
    """A config, result or codebook file could not be read or written."""

    def __init__(self, path, reason: str, action: str = "write"):
        self.path = str(path)
        super().__init__(f"cannot {action} {self.path}: {reason}")
