"""Exception hierarchy shared across the engine."""


class QBRError(Exception):
    """Base class for all engine errors."""


class ParseError(QBRError):
    """Malformed input file; message carries file and line number."""


class IntegrityError(QBRError):
    """Cross-reference violation inside a corpus (dangling id, bad range, dup)."""


class UnknownDocument(QBRError):
    pass


class UnknownScope(QBRError):
    pass


class UnknownEntry(QBRError):
    pass


class UnknownText(QBRError):
    """Precomputed provider asked for a text it has no vector for."""


class InvalidDim(QBRError):
    pass


class DimMismatch(QBRError):
    pass


class InconsistentDim(QBRError):
    pass


class FingerprintMismatch(QBRError):
    """Persisted artifact was built against a different embedding provider."""


class EmbedError(QBRError):
    """Embedding failed for a specific corpus entry; message names the entry id."""


class EmptyScopeSet(QBRError):
    pass


class NoQuestionForScope(QBRError):
    pass


class TransportError(QBRError):
    """Remote endpoint unreachable or returned a non-2xx status."""


class ProtocolError(QBRError):
    """Remote endpoint answered with a malformed or inconsistent payload."""


class EmptyGeneration(QBRError):
    pass


class InvalidTemperature(QBRError):
    pass


class EmptyTrainingSet(QBRError):
    pass


class EmptyTestSet(QBRError):
    pass


class TooFewScopes(QBRError):
    pass
