"""Exception hierarchy for archreco.

Every error raised by the library derives from :class:`ArchrecoError` so
callers can catch the whole family with one clause. The CLI maps error
classes to exit codes (see ``archreco.cli``).
"""

from __future__ import annotations


class ArchrecoError(Exception):
    """Base class for all archreco errors."""


class InvalidEntityError(ArchrecoError):
    """An entity violates a structural rule (e.g. bookkeeping key collision)."""


class SchemaError(ArchrecoError):
    """A JSON Schema document is itself invalid."""


class PointerSyntaxError(ArchrecoError):
    """A string is not a syntactically valid RFC 6901 JSON Pointer."""


class ParseError(ArchrecoError):
    """A model file is not valid JSON or lacks the required structure."""


class VersionError(ArchrecoError):
    """A model file declares an unsupported format version."""


class ConflictError(ArchrecoError):
    """Two values cannot be aggregated.

    Attributes:
        path: JSON Pointer to the conflicting location.
        left_value / right_value: the two incompatible JSON values.
        left_origin / right_origin: optional extractor ids or file names.
    """

    def __init__(self, path, left_value, right_value, left_origin=None, right_origin=None):
        self.path = path
        self.left_value = left_value
        self.right_value = right_value
        self.left_origin = left_origin
        self.right_origin = right_origin
        origins = ""
        if left_origin is not None or right_origin is not None:
            origins = f" (between {left_origin!r} and {right_origin!r})"
        super().__init__(
            f"conflict at {path!r}{origins}: {left_value!r} vs {right_value!r}"
        )


class RegistrationError(ArchrecoError):
    """An extractor cannot be registered (duplicate id, unsupported option)."""


class ExtractorError(ArchrecoError):
    """An extractor body failed.

    For external extractors ``exit_code`` and ``stderr`` carry the child
    process diagnostics when available.
    """

    def __init__(self, message, exit_code=None, stderr=None):
        self.exit_code = exit_code
        self.stderr = stderr
        super().__init__(message)


class TimeoutError(ExtractorError):  # noqa: A001 - deliberate, scoped to this package
    """An external extractor exceeded its configured timeout."""


class ProtocolError(ExtractorError):
    """An external extractor violated the stdin/stdout wire protocol."""


class IllegalMutationError(ArchrecoError):
    """An extractor deleted a key or rewrote an existing value.

    Attributes:
        extractor_id: the offending extractor.
        path: JSON Pointer to the illegal change.
    """

    def __init__(self, extractor_id, path, detail=""):
        self.extractor_id = extractor_id
        self.path = path
        suffix = f": {detail}" if detail else ""
        super().__init__(f"extractor {extractor_id!r} illegally mutated {path!r}{suffix}")


class DepthLimitError(ArchrecoError):
    """Entity nesting exceeded the engine's recursion cap."""


class LinkResolutionError(ArchrecoError):
    """Link resolution finished in a state forbidden by the active policy.

    ``offending`` lists (pointer, status) pairs for the links that violated
    the policy.
    """

    def __init__(self, message, offending):
        self.offending = list(offending)
        super().__init__(message)


class PatternError(ArchrecoError):
    """A glob or regular expression is malformed or uses unsupported syntax."""


class ConfigError(ArchrecoError):
    """A reconstruction configuration file is invalid."""
