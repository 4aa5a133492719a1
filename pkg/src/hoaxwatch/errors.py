"""Exception hierarchy for the hoaxwatch engine.

Every error raised by the engine derives from HoaxwatchError so callers can
catch broadly at the CLI boundary while library code raises precise types.
"""


class HoaxwatchError(Exception):
    """Base class for all engine errors."""


# --- numerical kernel ---

class DimensionMismatchError(HoaxwatchError):
    """Vector or matrix dimensions do not agree."""


class ZeroNormError(HoaxwatchError):
    """Cosine similarity requested for a zero-norm vector."""


class DegenerateSeriesError(HoaxwatchError):
    """Correlation requested for a constant (zero-variance) series."""


class EmptyEnsembleError(HoaxwatchError):
    """Embedding concatenation called with no parts."""


class OutOfRangeError(HoaxwatchError):
    """A correlation coefficient lies outside (-1, 1) after clamping."""


# --- PCA ---

class InsufficientSamplesError(HoaxwatchError):
    """Too few samples to fit the requested projection."""


# --- model gateway ---

class ProviderUnreachableError(HoaxwatchError):
    """The inference provider did not answer within the retry budget."""


class MalformedResponseError(HoaxwatchError):
    """The inference provider returned a payload the client cannot use."""


class UnsupportedLanguageError(HoaxwatchError):
    """No annotation lexicon is available for the detected language."""


# --- hoax index ---

class DuplicateIdError(HoaxwatchError):
    """A hoax id is already present in the index."""


class ProviderSkewError(HoaxwatchError):
    """Provider configuration does not match the one the index was built with."""


# --- keyword extraction / query building ---

class NoCandidatesError(HoaxwatchError):
    """Stopword and POS filtering removed every keyword candidate."""


class EmptySpecError(HoaxwatchError):
    """Query construction called with no groups."""


class CannotGeneralizeError(HoaxwatchError):
    """A single-group query cannot be generalized further."""


class QuerySyntaxError(HoaxwatchError):
    """A query string does not conform to the query grammar."""


# --- evaluation ---

class EmptyGoldError(HoaxwatchError):
    """Keyword evaluation called with an empty gold set."""


class LabelMismatchError(HoaxwatchError):
    """Prediction/gold label sequences disagree in length or label set."""


# --- OSN retrieval ---

class RateLimitedError(HoaxwatchError):
    """Server rate limit hit and no retry budget remains."""

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class AuthFailedError(HoaxwatchError):
    """The OSN API rejected the supplied credentials."""


class MalformedQueryError(HoaxwatchError):
    """The OSN API rejected the search query (HTTP 400)."""


class PageLossError(HoaxwatchError):
    """A pagination cursor expired; resume from the last checkpoint."""


# --- tracking analytics ---

class MissingTimestampError(HoaxwatchError):
    """A labeled tweet has no creation timestamp to bin."""


class BinMismatchError(HoaxwatchError):
    """Two time series with different bin width or origin were compared."""
