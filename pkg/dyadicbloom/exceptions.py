#!/usr/bin/env python3
# file: dyadicbloom/exceptions.py
# Description: Exception hierarchy shared by every dyadicbloom module.
# License: MIT

"""Errors raised by dyadicbloom.

Every precondition failure raises a subclass of :class:`DyadicError`, so
callers can catch the whole family at once. Subclasses that describe bad
argument values also derive from :class:`ValueError`.
"""

from typing import Optional

__all__ = [
    "DyadicError",
    "GridError",
    "SpecMismatchError",
    "ScaleError",
    "ExponentError",
    "RecipeError",
    "FamilyError",
    "SymmetryError",
    "NormalizationError",
    "DegenerateInstanceError",
    "ConfigError",
    "FixtureError",
    "SuiteFailure",
]


class DyadicError(Exception):
    """Base class for all dyadicbloom errors."""


class GridError(DyadicError, ValueError):
    """Invalid grid, interval, rectangle or Omega set."""


class SpecMismatchError(GridError):
    """Operands live on different grids."""


class ScaleError(GridError):
    """A scale request falls outside the grid depth."""


class ExponentError(DyadicError, ValueError):
    """An exponent is outside its admissible range."""


class RecipeError(DyadicError, ValueError):
    """A weight recipe has invalid parameters."""


class FamilyError(DyadicError, ValueError):
    """An Omega family or function list is empty."""


class SymmetryError(DyadicError, ValueError):
    """Unknown full paraproduct symmetry."""


class NormalizationError(DyadicError, ValueError):
    """A coefficient family violates its BMO normalization."""


class DegenerateInstanceError(DyadicError):
    """A ratio has a vanishing denominator; the instance should be skipped."""


class ConfigError(DyadicError):
    """Experiment configuration failed schema validation.

    Args:
        message: Human readable description.
        pointer: JSON pointer of the offending field ("" for the document root).
    """

    def __init__(self, message: str, pointer: Optional[str] = None):
        self.pointer = pointer if pointer is not None else ""
        super().__init__(f"{self.pointer or '/'}: {message}")


class FixtureError(DyadicError):
    """Calibration fixture is missing or would be overwritten."""


class SuiteFailure(DyadicError):
    """A verification suite found at least one failing check."""
