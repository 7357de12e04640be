"""Exception hierarchy shared by all kge modules."""


class KgeError(Exception):
    """Base class for every error raised by the toolkit."""


class ParseError(KgeError, ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class DuplicateEntityError(ParseError):
    pass


class EntityNotFoundError(KgeError, LookupError):
    pass


class MarkerCollisionError(KgeError, ValueError):
    pass


class NoContextError(KgeError):
    """Neither a description nor an instance-of label is available."""


class AlignmentError(KgeError):
    """The translated sentence does not contain exactly one well-formed marker pair."""


class SourceError(KgeError):
    def __init__(self, message, retryable=True):
        super().__init__(message)
        self.retryable = retryable


class FormatError(KgeError):
    """An LLM completion could not be reduced to a usable answer."""


class MatcherError(KgeError):
    pass


class ValidationError(KgeError, ValueError):
    pass


class UndefinedEntityError(KgeError):
    """Metric is undefined because the relevant gold set is empty."""


class ConfigError(KgeError):
    pass
