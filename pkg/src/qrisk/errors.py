"""Exception hierarchy shared across the package."""


class QriskError(Exception):
    """Base class for all package errors."""


class InsufficientEntropyError(QriskError):
    """Fewer random bits available than an operation requires."""

    def __init__(self, required: int, available: int):
        self.required = required
        self.available = available
        super().__init__(f"need {required} bits, only {available} available")


class PoolExhaustedError(QriskError):
    """An entropy pool has fewer unread bytes than requested."""

    def __init__(self, requested: int, remaining: int):
        self.requested = requested
        self.remaining = remaining
        super().__init__(
            f"pool exhausted: requested {requested} bytes, {remaining} remaining"
        )


class PartialFillError(QriskError):
    """A source ran dry while filling a pool."""

    def __init__(self, requested: int, obtained: int):
        self.requested = requested
        self.obtained = obtained
        super().__init__(
            f"source exhausted: obtained {obtained} of {requested} bytes"
        )


class StorageError(QriskError):
    """Pool or store file could not be written or is corrupt."""


class DomainError(QriskError):
    """Argument outside the mathematical domain of an operation."""


class NetworkError(QriskError):
    """Remote entropy service unreachable after retries."""

    def __init__(self, message: str, retries: int):
        self.retries = retries
        super().__init__(f"{message} (after {retries} retries)")


class ProviderError(QriskError):
    """Remote entropy service answered but reported failure."""


class MalformedResponseError(QriskError):
    """Remote entropy service returned an unparseable or out-of-range payload."""


class RecordFormatError(QriskError):
    """Measurement-record file violates the documented format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyInputError(QriskError):
    """Input contains no usable data."""


class DataError(QriskError):
    """Price table contains an invalid value."""


class OrderingError(QriskError):
    """Price table dates are not strictly increasing."""


class InsufficientDataError(QriskError):
    """Too few observations for the requested statistic."""


class NotPositiveSemidefiniteError(QriskError):
    """Covariance matrix cannot be factorized even with jitter."""


class InsufficientSampleError(QriskError):
    """Sample set too small for a statistical test."""


class DegenerateSeriesError(QriskError):
    """Sample variance is zero; autocorrelation undefined."""


class InsufficientPathsError(QriskError):
    """floor(N * alpha) < 1: the empirical tail is empty."""

    def __init__(self, n: int, alpha: float):
        self.n = n
        self.alpha = alpha
        required = int(1.0 / alpha) + 1
        self.required = required
        super().__init__(
            f"floor(N*alpha) = 0 for N={n}, alpha={alpha}; need N >= {required}"
        )


class EntropyExhaustedError(QriskError):
    """A simulation ran out of entropy mid-run."""

    def __init__(self, consumed: int, message: str = ""):
        self.consumed = consumed
        detail = message or f"entropy exhausted after {consumed} variates"
        super().__init__(detail)


class PartialStudyError(QriskError):
    """A precision study could not complete all requested runs."""

    def __init__(self, completed: int, requested: int, cause: Exception):
        self.completed = completed
        self.requested = requested
        self.cause = cause
        super().__init__(
            f"study aborted after {completed}/{requested} runs: {cause}"
        )


class ConflictError(QriskError):
    """Duplicate identifier in a registry."""


class NotFoundError(QriskError):
    """Referenced source, price table, portfolio or job does not exist."""


class ValidationError(QriskError):
    """Configuration rejected before execution."""
