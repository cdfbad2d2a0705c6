"""
Exception hierarchy for the Annuflow solver
"""

from typing import Any, Optional


class AnnuflowError(Exception):
    """Base class for all solver errors"""


class ParameterError(AnnuflowError):
    """Invalid model, grid, forcing or integrator parameter"""


class DomainError(AnnuflowError):
    """Concentration outside [0, 1]"""


class SingularityError(AnnuflowError):
    """Viscosity base is non-positive while the shear index is non-zero"""


class AlignmentError(AnnuflowError):
    """Profile length does not match the grid"""


class OracleSizeError(AnnuflowError):
    """Dense reference computation requested above desk scale"""


class ConfigError(AnnuflowError):
    """
    Study configuration could not be parsed or validated

    Args:
        message: Human-readable description
        line_number: 1-based line of the offending text, if known
        key: Name of the offending key, if known
    """

    def __init__(self, message: str, line_number: Optional[int] = None, key: Optional[str] = None):
        self.line_number = line_number
        self.key = key
        self.message = message
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")

    def __reduce__(self):
        return self.__class__, (self.message, self.line_number, self.key)


class NewtonDivergence(AnnuflowError):
    """Implicit stage solve failed to converge"""

    def __init__(self, message: str, iterations: int = 0):
        self.iterations = iterations
        super().__init__(message)

    def __reduce__(self):
        return self.__class__, (self.args[0], self.iterations)


class IntegrationAborted(AnnuflowError):
    """
    Time integration gave up after repeated step rejections

    Args:
        message: Human-readable description
        last_good_t: Last accepted non-dimensional time
        partial: Whatever output had been produced before the abort
    """

    def __init__(self, message: str, last_good_t: float, partial: Any = None):
        self.message = message
        self.last_good_t = last_good_t
        self.partial = partial
        super().__init__(f"{message} (last good t_hat = {last_good_t:.6g})")

    def __reduce__(self):
        return self.__class__, (self.message, self.last_good_t, self.partial)
