"""Exception types shared across the engine."""


class LuxenError(Exception):
    """Base class for all engine errors."""


class CsvFormatError(LuxenError):
    """Malformed CSV input (duplicate headers, ragged rows, ...)."""


class UnknownColumnError(LuxenError):
    """An operation referenced a column that does not exist."""


class TransformError(LuxenError):
    """A transform descriptor is invalid for the target frame."""


class IntentParseError(LuxenError):
    """A clause string could not be parsed.

    ``position`` is the character offset of the offending token when the
    input was a string, otherwise None.
    """

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class IntentValidationError(LuxenError):
    """No clause of the intent could be resolved against the frame."""


class ExpansionError(LuxenError):
    """Intent expansion failed (e.g. wildcard over a capped column)."""


class DuplicateActionError(LuxenError):
    """An action with the same name is already registered."""
