"""Exception types shared across the package."""


class ClarifierError(Exception):
    """Base class for all errors raised by this package."""


class CorpusError(ClarifierError):
    """Invalid corpus contents (empty file, single intent, bad stratification)."""


class RecordError(ClarifierError):
    """A malformed record in a line-oriented data file."""

    def __init__(self, path: str, line_no: int, reason: str):
        self.path = path
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{path}:{line_no}: {reason}")


class UnknownIntentError(ClarifierError):
    """An intent identifier not present in the corpus inventory."""


class SessionClosedError(ClarifierError):
    """A message was sent to a session that has already reached a final state."""


class ArtifactError(ClarifierError):
    """An engine artifact file that cannot be loaded."""
