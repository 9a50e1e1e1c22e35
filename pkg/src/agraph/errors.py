"""Exception taxonomy shared by every layer of the library.

Class names double as wire-level error names: the scripting binding and
the event hub report errors by ``type(exc).__name__``, so these names are
part of the public contract and must stay stable.
"""


class AGError(Exception):
    """Base class for all annotation graph errors."""


class MalformedId(AGError):
    """Identifier text violates the identifier grammar or names the wrong kind."""


class NoSuchObject(AGError):
    """Identifier does not resolve to a live object."""


class DuplicateId(AGError):
    """Identifier already names a live object."""


class OrderViolation(AGError):
    """Operation would make an annotation start after its end."""


class CycleError(AGError):
    """Operation would close a directed cycle in an annotation graph."""


class CrossGraphAnchors(AGError):
    """Annotation endpoints must belong to the annotation's own graph."""


class AnchorInUse(AGError):
    """Anchor still has attached annotations and cannot be deleted."""


class NoSuchFeature(AGError):
    """Feature name absent from the object's feature map."""


class BadArgument(AGError):
    """Argument value violates an operation's contract."""


class EmptyDomain(AGError):
    """Query needs at least one anchored anchor and found none."""


class UnknownFormat(AGError):
    """No codec registered under the requested format name."""


class CapabilityError(AGError):
    """Codec does not support the requested direction (load or store)."""


class ParseError(AGError):
    """Input file could not be parsed.

    Carries a best-effort source position; ``line``/``column`` are 1-based
    and 0 when unknown.
    """

    def __init__(self, message, line=0, column=0):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self):
        base = super().__str__()
        if self.line:
            return "%s (line %d, column %d)" % (base, self.line, self.column)
        return base


class DecodeError(AGError):
    """Event log record is structurally invalid."""


class SchemaError(AGError):
    """Event name unknown or a required parameter is missing."""


class DuplicateComponent(AGError):
    """A component with this name is already registered on the hub."""
