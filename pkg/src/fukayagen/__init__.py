"""Exact combinatorial models of partially wrapped Fukaya categories of graded surfaces."""

from fukayagen.errors import (
    DegenerateChargeError,
    FormatError,
    FukayagenError,
    InvalidInputError,
    PreconditionError,
    UnboundedError,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateChargeError",
    "FormatError",
    "FukayagenError",
    "InvalidInputError",
    "PreconditionError",
    "UnboundedError",
    "__version__",
]
