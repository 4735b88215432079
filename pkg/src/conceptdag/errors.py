"""Exception types shared across the package.

The CLI maps these onto its stable exit codes: usage problems exit 1,
data problems (parse/annotation/version) exit 2, resource and provider
problems exit 3.
"""

from __future__ import annotations


class ConceptDagError(Exception):
    """Base class for all package-specific errors."""


class ResourceError(ConceptDagError):
    """A resource file or directory is missing or unreadable."""


class ParseError(ConceptDagError):
    """A data file is malformed."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)


class AnnotationError(ParseError):
    """Token annotations violate the head-tree invariant."""


class UnsupportedVersionError(ParseError):
    """A serialized DAG file declares a format version we cannot read."""


class ProviderError(ConceptDagError):
    """An embedding provider failed to produce vectors."""


class MergeRejectedError(ConceptDagError):
    """A node merge was rejected because it would create a cycle."""


class StageError(ConceptDagError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
