"""Exception hierarchy shared by all pairlab modules."""


class PairlabError(Exception):
    """Base class for every error raised by pairlab."""


class ParameterError(PairlabError, ValueError):
    """An argument violates its documented range or invariants."""


class DomainError(PairlabError, ValueError):
    """A model is evaluated outside its domain of validity."""


class UndefinedResultError(PairlabError, ArithmeticError):
    """The requested quantity has no finite value for these inputs."""


class DataError(PairlabError, ValueError):
    """Input event data is malformed (unsorted, inconsistent, ...)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class FormatError(DataError):
    """A file does not follow the PTT1 layout."""


class CorruptionError(DataError):
    """A PTT1 file is truncated or damaged; ``offset`` is the byte position."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class InconsistentInputError(ParameterError):
    """Inputs are individually valid but contradict each other."""
