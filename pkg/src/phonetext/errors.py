"""Exception hierarchy.

Everything raised on bad input data derives from DataError so the CLI can
map it to a single exit code; InternalError marks violated invariants.
"""


class PhonetextError(Exception):
    pass


class DataError(PhonetextError):
    """Malformed or inconsistent input data (files, payloads, parameters)."""


class DictFormatError(DataError):
    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class LexiconError(DataError):
    pass


class CorpusError(DataError):
    pass


class AutomatonError(DataError):
    pass


class FormatError(DataError):
    """Serialized artifact is unreadable (schema, version, checksum)."""


class ChecksumError(FormatError):
    pass


class VersionError(FormatError):
    pass


class StreamError(DataError):
    pass


class ConfigError(DataError):
    pass


class DecodeError(PhonetextError):
    pass


class OracleError(PhonetextError):
    pass


class MetricsError(DataError):
    pass


class InternalError(PhonetextError):
    """An invariant the code promises to maintain was violated."""
