"""Exception hierarchy.

Each exception carries an ``exit_code`` so the CLI can map failures onto its
taxonomy: 2 for bad input or usage, 3 for backend / transport trouble and 4 for
internal invariant violations.
"""


class DetectLLMError(Exception):
    exit_code = 4


class InputError(DetectLLMError):
    exit_code = 2


class BackendError(DetectLLMError):
    exit_code = 3


class BackendUnavailable(BackendError):
    pass


class UnsupportedStrategy(BackendError):
    pass


class FillFailure(BackendError):
    pass


class TextTooShort(InputError):
    pass


class VocabMismatch(InputError):
    pass


class EmptyCorpus(InputError):
    pass


class InsufficientCorpus(InputError):
    pass


class ParseError(InputError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class InvariantViolation(DetectLLMError):
    exit_code = 4

    def __init__(self, message: str, record_id: str | None = None):
        if record_id is not None:
            message = f"record {record_id!r}: {message}"
        super().__init__(message)
        self.record_id = record_id


class EmptyStats(InputError):
    pass


class NoPerturbations(InputError):
    pass


class EmptyScoreList(InputError):
    pass


class MissingMethod(InputError):
    pass
