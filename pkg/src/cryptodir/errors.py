"""Exception types raised across the pipeline."""


class CryptoDirError(Exception):
    """Base class for every error raised by this package."""


# market data
class MalformedRow(CryptoDirError, ValueError):
    pass


class DuplicateTimestamp(CryptoDirError, ValueError):
    pass


class HttpError(CryptoDirError):
    def __init__(self, status, message=""):
        super().__init__(f"HTTP {status}: {message}".rstrip(": "))
        self.status = status


class DecodeError(CryptoDirError, ValueError):
    pass


class EmptyRange(CryptoDirError):
    pass


# indicators / dataset
class BadPeriod(CryptoDirError, ValueError):
    pass


class SeriesTooShort(CryptoDirError, ValueError):
    pass


class DirtySeries(CryptoDirError, ValueError):
    pass


class EmptyStats(CryptoDirError, ValueError):
    pass


class WindowTooLarge(CryptoDirError, ValueError):
    pass


class TooFewSamples(CryptoDirError, ValueError):
    pass


# classifiers
class EmptyTrain(CryptoDirError, ValueError):
    pass


class KTooLarge(CryptoDirError, ValueError):
    pass


class DimensionMismatch(CryptoDirError, ValueError):
    pass


class SingleClass(CryptoDirError, ValueError):
    pass


class LengthMismatch(CryptoDirError, ValueError):
    pass


class Empty(CryptoDirError, ValueError):
    pass


class ModelFormatError(CryptoDirError, ValueError):
    pass


# backtest
class AlignmentError(CryptoDirError, ValueError):
    pass
