"""Exception hierarchy shared across the package.

Every failure mode raised by fedcast derives from :class:`FedcastError`,
so callers (notably the CLI) can distinguish our validation errors from
genuine bugs. Exceptions carry the offending value as attributes where
that helps error reporting.
"""

from __future__ import annotations


class FedcastError(Exception):
    """Base class for all fedcast errors."""


class ConfigError(FedcastError):
    """Invalid or inconsistent pipeline configuration."""


# --- ingest -----------------------------------------------------------------

class IngestError(FedcastError):
    pass


class MalformedRow(IngestError):
    def __init__(self, line_no: int, detail: str = ""):
        self.line_no = line_no
        super().__init__(f"malformed row at line {line_no}" + (f": {detail}" if detail else ""))


class DuplicateMonth(IngestError):
    def __init__(self, month):
        self.month = month
        super().__init__(f"duplicate month {month}")


class EmptySeries(IngestError):
    pass


class HttpError(IngestError):
    def __init__(self, status: int, detail: str = ""):
        self.status = status
        super().__init__(f"HTTP {status}" + (f": {detail}" if detail else ""))


class AuthError(IngestError):
    pass


class ParseError(IngestError):
    pass


class UnknownDocType(IngestError):
    def __init__(self, value: str):
        self.value = value
        super().__init__(f"unknown doc_type {value!r}")


class MissingFile(IngestError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"missing file: {path}")


class DuplicateDocId(IngestError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"duplicate doc_id {doc_id!r}")


class NonMonotonicDates(IngestError):
    pass


class NotAProbability(IngestError):
    def __init__(self, row: int, value: float):
        self.row = row
        self.value = value
        super().__init__(f"row {row}: value {value} outside [0, 1]")


class SimplexViolation(IngestError):
    def __init__(self, row: int, total: float):
        self.row = row
        self.total = total
        super().__init__(f"row {row}: probabilities sum to {total}, expected 1.0")


# --- textfeat ---------------------------------------------------------------

class TextError(FedcastError):
    pass


class EmptyAfterCleaning(TextError):
    def __init__(self, doc_id: str = ""):
        self.doc_id = doc_id
        super().__init__(f"no tokens survive cleaning for document {doc_id!r}")


class ZeroLengthDocument(TextError):
    pass


class EmptyCorpus(TextError):
    pass


# --- macrofeat --------------------------------------------------------------

class AssemblyError(FedcastError):
    pass


class TooShort(AssemblyError):
    pass


class DegenerateTrainSplit(AssemblyError):
    pass


class MissingModality(AssemblyError):
    def __init__(self, method: str, block: str):
        self.method = method
        self.block = block
        super().__init__(f"method {method!r} requires the {block!r} block")


class NoMeetingsInRange(AssemblyError):
    pass


class MissingMacroHistory(AssemblyError):
    def __init__(self, meeting_date, series_id: str):
        self.meeting_date = meeting_date
        self.series_id = series_id
        super().__init__(
            f"no {series_id} observation strictly before meeting {meeting_date}"
        )


# --- sampling ---------------------------------------------------------------

class SamplingError(FedcastError):
    pass


class TooFewRows(SamplingError):
    pass


class KTooLarge(SamplingError):
    pass


class ClassTooSmall(SamplingError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"class {label!r} has fewer than 2 members")


class MissingClass(SamplingError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"class {label!r} absent from labels")


# --- models -----------------------------------------------------------------

class ModelError(FedcastError):
    pass


class SingleClass(ModelError):
    pass


class NonFiniteFeature(ModelError):
    pass


class DimensionMismatch(ModelError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} feature columns, got {got}")


class NonFiniteLoss(ModelError):
    pass


class NegativeFeature(ModelError):
    pass


class ModelFeatureMismatch(ModelError):
    def __init__(self, detail: str = ""):
        super().__init__(
            "stored feature names diverge from assembled features"
            + (f": {detail}" if detail else "")
        )


# --- evaluation -------------------------------------------------------------

class EvalError(FedcastError):
    pass


class SingleClassPresent(EvalError):
    pass


class LengthMismatch(EvalError):
    pass


class EmptySpace(EvalError):
    pass


# --- explain ----------------------------------------------------------------

class ExplainError(FedcastError):
    pass


class MissingCover(ExplainError):
    pass


class TooManyFeatures(ExplainError):
    def __init__(self, n_features: int, limit: int):
        self.n_features = n_features
        self.limit = limit
        super().__init__(
            f"brute-force enumeration supports at most {limit} features, got {n_features}"
        )
