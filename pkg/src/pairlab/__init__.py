"""Simulation and analysis toolkit for cavity-enhanced narrow-band photon pairs."""

from .errors import (CorruptionError, DataError, DomainError, FormatError,
                     InconsistentInputError, PairlabError, ParameterError,
                     UndefinedResultError)
from .kernels import BACKEND
from .stream import TimeTagStream

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "TimeTagStream", "PairlabError", "ParameterError", "DomainError",
    "UndefinedResultError", "InconsistentInputError", "DataError", "FormatError",
    "CorruptionError",
]
