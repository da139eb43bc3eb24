"""Exception hierarchy for the flowmatch toolkit.

Every error raised by the library derives from :class:`FlowmatchError`, so
callers can catch one base class at an API boundary.  The subclasses keep
failure modes distinguishable: bad numbers, out-of-range values, shape
mismatches, broken matchings, oversized brute-force requests, and the data
errors raised while reading scenario or COCO files.
"""


class FlowmatchError(Exception):
    """Base class for all toolkit errors."""


class MalformedInputError(FlowmatchError, ValueError):
    """A value that must be a finite number is NaN, infinite, or invalid."""


class DomainError(FlowmatchError, ValueError):
    """A finite value lies outside its legal range (probability, category, threshold)."""


class DimensionError(FlowmatchError, ValueError):
    """Array shapes or sequence lengths do not agree."""


class InvalidMatchingError(FlowmatchError, ValueError):
    """A matching violates the one-to-one constraints or references bad indices."""


class GraphStructureError(FlowmatchError, ValueError):
    """A flow graph is structurally broken (bad node indices, duplicate edges)."""


class OracleSizeError(FlowmatchError, ValueError):
    """A brute-force oracle was asked to enumerate an instance over its size cap."""


class ScenarioError(FlowmatchError):
    """Base class for scenario / annotation file problems."""


class ScenarioSyntaxError(ScenarioError):
    """The input is not parseable at all (e.g. invalid JSON)."""


class ScenarioSchemaError(ScenarioError):
    """The input parses but its structure does not match the scenario format."""


class ScenarioInvariantError(ScenarioError):
    """The input is well-formed but a value violates a model invariant."""


class CocoFormatError(ScenarioError):
    """COCO ground-truth / detection inputs are inconsistent or incomplete."""


class ProtocolError(FlowmatchError):
    """A wire frame that cannot be decoded (truncated or corrupt)."""


class RemoteMatcherError(FlowmatchError):
    """A failure reported by the matcher server over the wire."""
