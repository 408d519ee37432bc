"""Exception hierarchy for the formlink toolkit.

Every error raised by the library derives from FormlinkError so CLI
entry points can map library failures to exit code 1 uniformly.
"""


class FormlinkError(Exception):
    """Base class for all formlink errors."""


class MalformedJson(FormlinkError):
    """An annotation file is not syntactically valid JSON.

    Carries the byte offset of the first syntax error when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class SchemaViolation(FormlinkError):
    """Valid JSON that does not match the annotation schema.

    Missing field, wrong type, or an unknown entity label name.
    """


class InvariantViolation(FormlinkError):
    """Schema-valid input that breaks a structural invariant.

    Duplicate entity id, or a link referencing a nonexistent entity.
    """


class UnknownId(FormlinkError):
    """An entity id not present in the form."""


class NotAnAnswer(FormlinkError):
    """The id exists but its entity is not labeled Answer."""


class MissingScore(FormlinkError):
    """A candidate pair reached the decoder without a score."""


class DegenerateDataset(FormlinkError):
    """Training data contains only one class."""


class ExternalScorerFailure(FormlinkError):
    """The external scorer broke the wire protocol.

    request_id identifies the offending request when one is known.
    """

    def __init__(self, message: str, request_id: int | None = None):
        super().__init__(message)
        self.request_id = request_id


class NoGold(FormlinkError):
    """AP/Rank requested for an answer with no gold question (m = 0)."""


class FormMismatch(FormlinkError):
    """Predictions and gold annotations refer to different forms."""
