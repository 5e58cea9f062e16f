"""
Fehlerklassen für das Maxwell-Labor.

All library code raises one of these; only the command line turns them into exit codes.
"""


class LabError(Exception):
    """Base class for every error raised by the lab."""


class LatticeError(LabError, ValueError):
    """Invalid complex parameters, degree out of range or cochain/complex mismatch."""


class DegreeMismatchError(LatticeError):
    """Operands carry different form degrees."""


class SolverError(LabError, RuntimeError):
    """An eigen-solve or a decomposition did not go through."""


class TopologicalObstructionError(LabError, ValueError):
    """Data has a component that no elliptic solve can produce (harmonic or wrong type)."""


class CFLViolationError(LabError, ValueError):
    """Time step too large for the stability bound."""


class SupportError(LabError, ValueError):
    """A current leaves its declared window or touches the time boundary."""


class ConstraintViolationError(LabError, ValueError):
    """A gauge, co-closure or field equation precondition does not hold."""


class ZeroModeError(LabError, ValueError):
    """A harmonic mode was handed to the quantization step."""


class ModeLeakageError(LabError, ValueError):
    """A classical solution has too much weight outside the selected modes."""


class AmplitudeGuardError(LabError, ValueError):
    """A coherent amplitude is too large for the truncated Fock space."""


class ConfigError(LabError, ValueError):
    """Bad experiment configuration; carries the offending line when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
