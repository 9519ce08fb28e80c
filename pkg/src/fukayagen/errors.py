"""Exception hierarchy.

Everything derives from RuntimeError so callers that only know about bad input
(`except RuntimeError`) keep working.
"""

from __future__ import annotations


class FukayagenError(RuntimeError):
    """Base class for all library errors."""


class InvalidInputError(FukayagenError):
    """A graph, word, presentation or representation fails validation."""


class PreconditionError(FukayagenError):
    """An operation was called outside the situation it is defined for."""


class FormatError(FukayagenError):
    """A JSON document does not match its schema."""

    def __init__(self, message: str, location: str = "") -> None:
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class UnboundedError(FukayagenError):
    """An enumeration or Hom space is infinite and no bound was given."""


class DegenerateChargeError(FukayagenError):
    """Central charge is zero, real on a simple, or two charges are colinear."""
