"""Exception types shared across the package."""


class CloudSketchError(Exception):
    """Base class for all package errors."""


class ParseError(CloudSketchError):
    """Malformed geometry or image input.

    `line` is the 1-based line number of the offending input when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFormatError(ParseError):
    """Recognized but unsupported input variant (e.g. binary PLY)."""


class DegenerateGeometryError(CloudSketchError):
    """Geometry too degenerate for the requested operation."""


class DegenerateFitError(CloudSketchError):
    """Rigid fit is underdetermined (too few or collinear correspondences)."""


class BlankSketchError(CloudSketchError):
    """Sketch contains no ink pixels."""


class VocabularyError(CloudSketchError):
    """Vocabulary training cannot proceed (e.g. sample smaller than k)."""


class IndexFormatError(CloudSketchError):
    """Base class for persisted-index load failures."""


class BadMagicError(IndexFormatError):
    """Index file does not start with the expected magic string."""


class UnknownVersionError(IndexFormatError):
    """Index file version is not supported by this loader."""

    def __init__(self, found, supported):
        self.found = found
        self.supported = supported
        super().__init__(f"index version {found} not supported (loader supports {supported})")


class TruncatedIndexError(IndexFormatError):
    """Index file ends before all declared data was read."""


class StaleIndexError(IndexFormatError):
    """Index was built from a manifest whose content has since changed."""


class SessionStateError(CloudSketchError):
    """An action was attempted in a session state that does not allow it."""

    def __init__(self, state, action):
        self.state = state
        self.action = action
        super().__init__(f"action '{action}' not allowed in state {state}")
