"""
Exception hierarchy for the biphoton toolkit.

Every error carries a stable ``error_code`` and maps onto the CLI exit-code
contract through the class attribute ``exit_code``.
"""

from typing import Any, Dict, Optional


class BiphotonError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 1
    default_code = "BIPHOTON_ERROR"

    def __init__(self, message: str, error_code: Optional[str] = None,
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.default_code
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details,
        }


class ParameterValidationError(BiphotonError):
    """A parameter set or option violates its declared invariants"""

    exit_code = 1
    default_code = "VALIDATION_ERROR"


class FitBoundsError(ParameterValidationError):
    default_code = "FIT_BOUNDS_VIOLATION"


class UnsortedRecordsError(ParameterValidationError):
    default_code = "UNSORTED_RECORDS"


class NumericalError(BiphotonError):
    """Numerical failure: inadequate grid, missing peak, non-convergence"""

    exit_code = 2
    default_code = "NUMERICAL_ERROR"


class GridInadequateError(NumericalError):
    default_code = "GRID_INADEQUATE"

    def __init__(self, check: str, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details={"check": check, **(details or {})})
        self.check = check


class NoPeakError(NumericalError):
    default_code = "NO_PEAK"


class EdgePeakError(NumericalError):
    default_code = "EDGE_PEAK"


class ZeroDensityError(NumericalError):
    default_code = "ZERO_DELAY_DENSITY"


class ConvergenceError(NumericalError):
    default_code = "NOT_CONVERGED"


class StorageError(BiphotonError):
    """File could not be read or written"""

    exit_code = 3
    default_code = "IO_ERROR"


class DataFormatError(StorageError):
    default_code = "DATA_FORMAT_ERROR"
