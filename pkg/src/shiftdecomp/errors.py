"""Exceptions shared by all modules.

Each error maps to one CLI exit code; see cli.EXIT_CODES.
"""


class ShiftError(Exception):
    """Base class for all library errors."""


class ParseError(ShiftError):
    """Malformed input file or JSON payload."""


class EmptyShift(ShiftError):
    """No bi-infinite sequence survives trimming."""


class WordNotInLanguage(ShiftError):
    """A word required to be in the language is not."""


class ZeroMatrix(ShiftError):
    """Adjacency matrix has no essential part."""


class NotAlgebraicInteger(ShiftError):
    """Minimal polynomial is not monic."""


class EntropyNotSeparated(ShiftError):
    """A strict entropy inequality required by a bound does not hold."""


class WordTooShort(ShiftError):
    """Input word shorter than the code window."""


class WordNotInDomain(ShiftError):
    """Word is not in the language of the code's domain."""


class ImageNotInDomain(ShiftError):
    """Image language of the first code escapes the domain of the second."""


class Mismatch(ShiftError):
    """A verification certificate failed; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SearchExhausted(ShiftError):
    """A bounded search ran out of budget; carries the closest result."""

    def __init__(self, message, closest=None):
        super().__init__(message)
        self.closest = closest


class IterationCap(ShiftError):
    """An iteration exceeded its configured bound; carries the trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class OrbitNotFound(ShiftError):
    """The designated periodic orbit is not present with that least period."""


class CensusMismatch(ShiftError):
    """Post-surgery census check failed (internal construction guard)."""


class NotIrreducible(ShiftError):
    """Operation requires an irreducible presentation."""


class NotMixingTarget(ShiftError):
    """Operation requires a mixing shift of finite type."""


class UnboundedSearch(ShiftError):
    """A search has no finite bound for these inputs."""


class NotFound(ShiftError):
    """Bounded search finished with no hit; a meaningful negative result."""

    def __init__(self, message, searched_bound=None):
        super().__init__(message)
        self.searched_bound = searched_bound


class RealizationUnavailable(ShiftError):
    """No nonnegative matrix realization is derivable for the target."""


class InexactTarget(ShiftError):
    """An approximate target could not be resolved to an exact value."""
