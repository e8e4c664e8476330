"""Argument checks shared by the numerical modules.

Every check raises :class:`DomainError` naming the offending argument so that
the CLI can relay the name back to the user.
"""

from __future__ import annotations

import math
import numbers


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""

    def __init__(self, name: str, message: str):
        self.name = name
        super().__init__(f"{name}: {message}")


class ConvergenceError(ArithmeticError):
    """An iterative method exhausted its budget before meeting tolerance.

    The best available estimate is kept on ``value`` (and ``error`` when the
    method produces an error estimate) for diagnostics; callers must not treat
    it as a converged result.
    """

    def __init__(self, message: str, value: float = math.nan, error: float = math.nan):
        self.value = value
        self.error = error
        super().__init__(message)


def _as_real(name, value) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise DomainError(name, f"expected a real number, got {value!r}")
    value = float(value)
    if math.isnan(value):
        raise DomainError(name, "must not be NaN")
    return value


def check_real(name, value) -> float:
    value = _as_real(name, value)
    if math.isinf(value):
        raise DomainError(name, f"must be finite, got {value}")
    return value


def check_positive(name, value, *, allow_zero: bool = False) -> float:
    value = check_real(name, value)
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise DomainError(name, f"must be {bound}, got {value}")
    return value


def check_open_unit(name, value) -> float:
    """Check ``0 < value < 1``."""
    value = check_real(name, value)
    if not 0.0 < value < 1.0:
        raise DomainError(name, f"must lie in (0, 1), got {value}")
    return value


def check_at_least(name, value, lower: float) -> float:
    value = check_real(name, value)
    if value < lower:
        raise DomainError(name, f"must be >= {lower}, got {value}")
    return value


def check_int(name, value, *, minimum: int = 1) -> int:
    if isinstance(value, bool):
        raise DomainError(name, f"expected an integer, got {value!r}")
    if isinstance(value, numbers.Integral):
        value = int(value)
    elif isinstance(value, numbers.Real) and float(value).is_integer():
        value = int(value)
    else:
        raise DomainError(name, f"expected an integer, got {value!r}")
    if value < minimum:
        raise DomainError(name, f"must be >= {minimum}, got {value}")
    return value
