"""Exception types raised by the toolkit."""


class OcrqaError(Exception):
    """Base class for all toolkit errors."""


class InputError(OcrqaError):
    """Raw input could not be decoded or read."""


class ParseError(OcrqaError):
    """A structured file did not follow its format.

    ``location`` is a line number for line-oriented files and a key path
    (``context[1].leaves[0]``) for hierarchical documents.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class ValidationError(OcrqaError):
    """Well-formed data that violates a model or suite constraint."""


class UndefinedScoreError(OcrqaError):
    """A score was requested for a reference with nothing to score."""
