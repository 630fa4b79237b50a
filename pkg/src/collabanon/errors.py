"""Exception types shared across the package."""


class AnonymizationError(Exception):
    """Base class for all errors raised by collabanon."""


class NetworkFormatError(AnonymizationError, ValueError):
    """Malformed network, hierarchy, mapping or contribution text."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class InvalidGraphError(AnonymizationError, ValueError):
    """A structural invariant of a simple labeled graph would be violated."""


class UnknownVertexError(AnonymizationError, KeyError):
    def __str__(self):
        return f"unknown vertex: {self.args[0]!r}"


class UnknownLabelError(AnonymizationError, KeyError):
    def __str__(self):
        return f"label not in hierarchy: {self.args[0]!r}"


class ComponentTooLargeError(AnonymizationError):
    """Canonical-code search exceeded its size or state budget."""


class UnsatisfiableError(AnonymizationError):
    """The requested privacy level cannot be reached on this input."""


class PartitionError(AnonymizationError, ValueError):
    pass


class ProvenanceError(AnonymizationError):
    """Invalid merge, revocation or query against a collaborative network."""
