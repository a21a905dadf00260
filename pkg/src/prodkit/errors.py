"""Exception types shared across the package."""


class ProdkitError(Exception):
    """Base class for all errors raised by prodkit."""


class DomainError(ProdkitError, ValueError):
    """An argument lies outside the domain of an operation."""


class ExprSyntaxError(ProdkitError, ValueError):
    """A sequence expression could not be parsed.

    ``offset`` is the byte offset into the source text where parsing failed.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name, offset):
        ProdkitError.__init__(self, f"unknown identifier {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class EvaluationError(ProdkitError, ValueError):
    """A sequence term was non-finite or, for factor sequences, non-positive."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class HypothesisError(ProdkitError):
    """A theorem hypothesis required by an operation does not hold."""


class HypothesisWarning(UserWarning):
    """A numeric precheck suggests a theorem hypothesis fails; the run continues."""
