"""
Error hierarchy for the M-scheme simulator.

Every error carries the exit code the command-line front end returns for it,
so the exit-code table in ``--help`` and README is generated from here.
"""

from typing import Dict, Optional


class SimulatorError(Exception):
    """Base class for all simulator errors"""

    exit_code = 1

    def __init__(self, message: str, field: Optional[str] = None,
                 path: Optional[str] = None, time: Optional[float] = None):
        super().__init__(message)
        self.message = message
        self.field = field
        self.path = path
        self.time = time

    def __str__(self) -> str:
        return f"{type(self).__name__}: {self.message}"


class ParseError(SimulatorError):
    """Malformed configuration document or --set item"""
    exit_code = 2


class ValidationError(SimulatorError):
    """Physically invalid value; ``field`` names the offending parameter"""
    exit_code = 3


class UnknownKey(SimulatorError):
    """Configuration key outside the documented schema"""
    exit_code = 4


class IoError(SimulatorError):
    """Unreadable input or unwritable output; ``path`` names the file"""
    exit_code = 5


class CyclicTopology(SimulatorError):
    """Coupling graph contains a closed loop"""
    exit_code = 10


class DegenerateSteadyState(SimulatorError):
    """Liouvillian nullspace has dimension greater than one"""
    exit_code = 11


class SingularSolve(SimulatorError):
    """Replaced-row system is numerically singular or its residual is too large"""
    exit_code = 12


class StepFailure(SimulatorError):
    """Time integration could not meet its accuracy contract"""
    exit_code = 13


class AmbiguousTracking(SimulatorError):
    """Dressed-state overlap between adjacent sweep points below 1/sqrt(2)"""
    exit_code = 14


ERROR_TYPES = (
    ParseError, ValidationError, UnknownKey, IoError, CyclicTopology,
    DegenerateSteadyState, SingularSolve, StepFailure, AmbiguousTracking,
)


def exit_codes() -> Dict[str, int]:
    """Exit-code table, ordered by code"""
    table = {cls.__name__: cls.exit_code for cls in ERROR_TYPES}
    table["unexpected error"] = SimulatorError.exit_code
    return dict(sorted(table.items(), key=lambda item: item[1]))
