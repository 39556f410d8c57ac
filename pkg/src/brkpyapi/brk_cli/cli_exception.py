from typing import Optional


class CliException(Exception):
    """
    Is used when a run cannot be configured or orchestrated.
    Check the inner exception for details.
    """
    def __init__(self, message):
        super().__init__(message)


class ParseError(CliException):
    """
    The configuration document is not well-formed. ``line`` and ``column`` are 1-based when known.
    """
    def __init__(self, message, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(CliException):
    """
    The configuration is well-formed but a key is unknown or a value is invalid.
    """
    def __init__(self, message):
        super().__init__(message)
